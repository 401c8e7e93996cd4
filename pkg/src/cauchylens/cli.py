"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input.
Options can also come from a TOML or JSON config file passed as
``--config``; its top-level keys are option names (``mesh``, ``seed``,
``suite``, ``tol_solve``, ``tol_sym``, ``out``, ...) and act as defaults that
explicit flags override.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import tomli
from threadpoolctl import threadpool_limits

from . import generators, verify
from .calculus import build_calculus
from .gluing import GluingSetup, glue_states
from .phasespace import InitialData, PhaseSpace, boundary_circles, chh_decompose
from .relativize import ExtendedSpace
from .simplicial import MeshError, load_mesh, to_json, to_off
from .states import DominationError, QuasiFreeState, gram_check, l2_state, load_mu

CONFIG_KEYS = {"mesh", "seed", "suite", "tol_solve", "tol_sym", "out", "data", "mu", "mesh1", "mesh2", "match", "mode", "labels"}


class InputError(click.ClickException):
    exit_code = 2


def _load_config(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomli.loads(text) if p.suffix.lower() == ".toml" else json.loads(text)
    except (tomli.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("config must be a table/object of option values")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


def resolve_mesh(spec: str):
    """``path``, ``builtin:name[:k=v,...]`` or a bare builtin name."""
    try:
        if spec.startswith("builtin:"):
            return generators.from_spec(spec[len("builtin:"):])
        if Path(spec).exists():
            return load_mesh(spec)
        if spec.partition(":")[0] in generators.BUILTINS:
            return generators.from_spec(spec)
    except (MeshError, ValueError, TypeError) as exc:
        raise InputError(f"bad mesh {spec!r}: {exc}") from exc
    raise InputError(f"mesh {spec!r} is neither a file nor a builtin")


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)
    click.echo(str(d / name))


def _csv(header: list[str], rows, seed: int | None = None) -> str:
    lines = [] if seed is None else [f"# seed={seed}"]
    lines.append(",".join(header))
    lines += [",".join(str(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--config", type=click.Path(dir_okay=False), default=None, help="TOML or JSON file of option defaults.")
@click.pass_context
def main(ctx: click.Context, config: str | None) -> None:
    """Discrete Maxwell edge modes on triangulated Cauchy surfaces."""
    threads = os.environ.get("LENS_THREADS", "1")
    try:
        n = int(threads)
    except ValueError:
        raise InputError(f"LENS_THREADS must be an integer, got {threads!r}")
    ctx.with_resource(threadpool_limits(limits=max(n, 1)))
    if config is not None:
        doc = _load_config(config)
        ctx.default_map = {name: dict(doc) for name in main.commands}


_mesh_opt = click.option("--mesh", default="annulus", show_default=True, help="Mesh file, builtin:spec or builtin name.")
_out_opt = click.option("--out", default=None, help="Output directory (stdout when omitted).")
_seed_opt = click.option("--seed", default=0, type=int, show_default=True)


@main.command()
@_mesh_opt
@_out_opt
@click.option("--format", "fmt", type=click.Choice(["json", "off"]), default=None, help="Also write the mesh in this format.")
def mesh(mesh: str, out: str | None, fmt: str | None) -> None:
    """Build or load a mesh and print a JSON summary."""
    m = resolve_mesh(mesh)
    c = build_calculus(m)
    summary = {
        "vertices": c.n_vertices,
        "edges": c.n_edges,
        "triangles": m.count(2),
        "euler_characteristic": m.euler_characteristic,
        "components": c.components.count,
        "boundary_circles": len(boundary_circles(c)),
        "boundary_vertices": c.n_boundary,
    }
    _write(out, "mesh.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if fmt == "json":
        _write(out, "mesh_data.json", to_json(m) + "\n")
    elif fmt == "off":
        _write(out, "mesh.off", to_off(m))


@main.command()
@_mesh_opt
@click.option("--data", required=True, type=click.Path(dir_okay=False), help="InitialData JSON {A, E, rho}.")
@_out_opt
def decompose(mesh: str, data: str, out: str | None) -> None:
    """CHH coordinates of initial data, as JSON."""
    c = build_calculus(resolve_mesh(mesh))
    try:
        d = InitialData.from_json(json.loads(Path(data).read_text()), c)
        coords = chh_decompose(c, d)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"bad data file {data}: {exc}") from exc
    _write(out, "chh.json", json.dumps(coords.to_json()) + "\n")


@main.command(name="verify")
@_mesh_opt
@_seed_opt
@click.option("--suite", default="all", show_default=True, help="Suite name or 'all'.")
@click.option("--tol-solve", default=1e-10, type=float, show_default=True)
@click.option("--tol-sym", default=1e-8, type=float, show_default=True)
@_out_opt
def verify_cmd(mesh: str, seed: int, suite: str, tol_solve: float, tol_sym: float, out: str | None) -> None:
    """Run property suites and write a CSV report."""
    names = list(verify.SUITES) if suite == "all" else suite.split(",")
    unknown = [n for n in names if n not in verify.SUITES]
    if unknown:
        raise InputError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(verify.SUITES)}")
    ctx = verify.Context(seed=seed, tol_solve=tol_solve, tol_sym=tol_sym, mesh=resolve_mesh(mesh), mesh_name=mesh.split(":")[-1] if mesh.startswith("builtin:") else Path(mesh).stem)
    rows = verify.run_suites(names, ctx)
    _write(out, "report.csv", verify.render(rows, seed))
    failed = [r for r in rows if not r.passed]
    for r in failed:
        click.echo(f"FAIL {r.suite}/{r.case}/{r.quantity}: {r.value:.6e} (tolerance {r.tolerance:.1e})", err=True)
    sys.exit(1 if failed else 0)


@main.command()
@_mesh_opt
@_seed_opt
@click.option("--mu", default=None, type=click.Path(dir_okay=False), help="Covariance in Matrix Market format (L2 state when omitted).")
@click.option("--labels", default=20, type=int, show_default=True, help="Random labels for the Gram check.")
@_out_opt
def state(mesh: str, seed: int, mu: str | None, labels: int, out: str | None) -> None:
    """Domination margin and Gram positivity of a quasi-free state."""
    ps = PhaseSpace(build_calculus(resolve_mesh(mesh)))
    try:
        w = l2_state(ps) if mu is None else QuasiFreeState(ps.space, load_mu(mu))
    except (OSError, ValueError) as exc:
        if isinstance(exc, DominationError):
            _write(out, "state.csv", _csv(list(verify.COLUMNS), [("state", "mu", "domination", "nan", "1.0e+00", "false")], seed))
            click.echo(f"FAIL {exc}", err=True)
            sys.exit(1)
        raise InputError(f"bad covariance {mu}: {exc}") from exc
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(labels, ps.dim)) * 2.0 / np.sqrt(ps.dim)
    rows = [
        verify.below("state", "mu", "domination_margin", w.margin, 1.0 + 1e-10),
        verify.above("state", "mu", "gram_min_eigenvalue", gram_check(w, V), -1e-10),
    ]
    _write(out, "state.csv", verify.render(rows, seed))
    sys.exit(0 if all(r.passed for r in rows) else 1)


@main.command()
@_mesh_opt
@_out_opt
def spectrum(mesh: str, out: str | None) -> None:
    """Eigenvalues of the boundary Laplacian on LG."""
    X = ExtendedSpace(PhaseSpace(build_calculus(resolve_mesh(mesh))))
    w, _ = X.boundary_spectrum()
    _write(out, "spectrum.csv", _csv(["index", "eigenvalue"], [(i, f"{x:.12e}") for i, x in enumerate(w)]))


@main.command()
@_mesh_opt
@_seed_opt
@_out_opt
def relativize(mesh: str, seed: int, out: str | None) -> None:
    """Dressing error of the truncated relativisation at each eigenvalue cut."""
    X = ExtendedSpace(PhaseSpace(build_calculus(resolve_mesh(mesh))))
    x = np.random.default_rng(seed).normal(size=X.bulk.dim)
    rows = [(f"{mu:.12e}", f"{err:.12e}") for mu, err in X.dressing_errors(x)]
    _write(out, "dressing.csv", _csv(["mu_cut", "dressing_error"], rows, seed))


@main.command()
@click.option("--mesh1", default=None, help="Side-1 mesh file.")
@click.option("--mesh2", default=None, help="Side-2 mesh file.")
@click.option("--match", default=None, help="JSON boundary match.")
@_seed_opt
@click.option("--mode", type=click.Choice(["one_two", "two_one", "mix"]), default="one_two", show_default=True)
@click.option("--labels", default=5, type=int, show_default=True, help="Random global data to embed.")
@_out_opt
def glue(mesh1, mesh2, match, seed: int, mode: str, labels: int, out: str | None) -> None:
    """Glue two sides (the split sphere when no files are given) and evaluate L2 states."""
    given = [mesh1, mesh2, match]
    try:
        if all(g is None for g in given):
            setup = GluingSetup.from_split(generators.split_sphere())
        elif all(g is not None for g in given):
            setup = GluingSetup.from_files(mesh1, mesh2, match)
        else:
            raise InputError("give all of --mesh1, --mesh2 and --match, or none")
    except (OSError, MeshError, ValueError, KeyError) as exc:
        raise InputError(f"bad gluing input: {exc}") from exc
    from .sampling import random_closed_surface_data

    rng = np.random.default_rng(seed)
    state_ = glue_states(setup, l2_state(setup.ps1), l2_state(setup.ps2), mode)
    rows = []
    for i in range(labels):
        x = random_closed_surface_data(setup.cg, rng)
        _, g = setup.embed_global(x)
        g = g / max(np.linalg.norm(g), 1e-300)
        value = state_.characteristic(g)[0]
        rows.append((i, f"{np.linalg.norm(g[setup.glued.slice('f')]):.12e}", f"{value.real:.12e}", f"{value.imag:.12e}"))
    _write(out, "glue.csv", _csv(["case", "surface_norm", "state_real", "state_imag"], rows, seed))


if __name__ == "__main__":
    main()
