"""Command-line interface: ``nft-toolkit {nft|inft|roundtrip|convergence|evolve}``.

Exit codes: 0 success, 1 round-trip tolerance failure, 2 malformed input,
3 duplicate eigenvalues, 4 round-trip eigenvalue count mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .darboux import TailWarning, default_grid, synthesize
from .eigensolver import SearchRegion, discrete_spectrum, round_trip
from .exceptions import DuplicateEigenvalueError, NFTError, SpectrumFormatError
from .forward_backward import fb_continuous_spectrum, fb_scatter_many
from .io import pulse_to_csv, read_pulse_csv, read_spectrum_json, spectrum_to_dict, write_spectrum_json
from .kernels import KernelKind, forward_scatter_many, scalar_trapezoid_demo
from .spectra import ContinuousSpectrum, DiscreteSpectrum, NonlinearSpectrum, evolve_spectrum, shift_spectrum

logger = logging.getLogger("nft_toolkit")

EXIT_TOLERANCE = 1
EXIT_FORMAT = 2
EXIT_DUPLICATE = 3
EXIT_COUNT = 4

# the two-soliton test pulse used by the convergence sweep
TABLE_EIGENVALUES = (0.5j, 1.0j)
TABLE_QD = (3.0, -6.0)
TABLE_T0 = 5.0
TABLE_N = (32, 64, 1024)
SCALAR_N = tuple(2**k for k in range(2, 11))
SCALAR_FUNCTIONS = {
    "zero": lambda t: np.zeros_like(np.asarray(t, dtype=float)),
    "t": lambda t: np.asarray(t, dtype=float),
    "sech": lambda t: 1.0 / np.cosh(t),
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _lambda_grid(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"lambda grid must look like min:max:count, got {text!r}") from None
    if count < 1 or (count > 1 and not lo < hi):
        raise argparse.ArgumentTypeError("lambda grid needs min < max and count >= 1")
    return np.linspace(lo, hi, count)


def _region(text: str) -> tuple:
    try:
        r = SearchRegion.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return r.re_range, r.im_range


def _complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(x.replace(" ", "")) for x in text.split(",")], dtype=complex)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers such as 0.5j,1j, got {text!r}") from None


def _seed_grid(text: str) -> tuple:
    try:
        n_re, n_im = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed grid must look like 8x8, got {text!r}") from None
    return n_re, n_im


def _search_region(args) -> SearchRegion:
    re_range, im_range = args.region or (SearchRegion.re_range, SearchRegion.im_range)
    return SearchRegion(re_range, im_range, seed_grid=args.seed_grid, newton_tol=args.newton_tol)


def _fmt(x) -> str:
    return repr(float(x))


def _load_spectrum(path) -> NonlinearSpectrum:
    try:
        return read_spectrum_json(path)
    except DuplicateEigenvalueError as exc:
        raise CliError(str(exc), EXIT_DUPLICATE) from None
    except (SpectrumFormatError, ValueError, OSError) as exc:
        raise CliError(f"cannot read spectrum {path}: {exc}", EXIT_FORMAT) from None


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_inft(args) -> int:
    spec = _load_spectrum(args.input).discrete
    T0, N = default_grid(spec)
    T0 = args.T0 if args.T0 is not None else T0
    N = args.N if args.N is not None else N
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TailWarning)
        pulse = synthesize(spec, T0, N)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(pulse_to_csv(pulse), args.out)
    return 0


def cmd_nft(args) -> int:
    try:
        pulse, centre = read_pulse_csv(args.input)
    except (SpectrumFormatError, OSError) as exc:
        raise CliError(f"cannot read pulse {args.input}: {exc}", EXIT_FORMAT) from None
    kind = KernelKind.parse(args.kernel)
    region = _search_region(args)
    disc = discrete_spectrum(pulse, region, kind, args.split, args.c, fb=args.fb, eigenvalues=args.eigenvalues)
    grid = args.lambda_grid
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        if args.fb:
            cont = fb_continuous_spectrum(pulse, grid, kind, args.split, args.c)
        else:
            a, b, _, _ = forward_scatter_many(pulse, grid.astype(complex), kind)
            with np.errstate(divide="ignore", invalid="ignore"):
                cont = ContinuousSpectrum(grid, np.where(np.abs(a) < 1e-14, np.nan, b / a))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if centre != 0.0:
        disc = shift_spectrum(disc, centre)
        cont = ContinuousSpectrum(grid, cont.qc * np.exp(-2j * grid * centre))
    meta = {
        "N": pulse.n_intervals,
        "T0": pulse.t0_half_width,
        "t_centre": centre,
        "kernel": kind.value,
        "fb": bool(args.fb),
        "split": args.split,
        "c": args.c,
        "region": {"re": list(region.re_range), "im": list(region.im_range),
                   "seed_grid": list(region.seed_grid)},
        "newton_tol": region.newton_tol,
        "dedupe_radius": region.dedupe_radius,
    }
    spec = NonlinearSpectrum(disc, cont)
    if args.out is None:
        print(json.dumps(spectrum_to_dict(spec, meta), indent=2))
    else:
        write_spectrum_json(args.out, spec, meta)
    return 0


def random_spectrum(rng: np.random.Generator, max_count: int = 4, min_gap: float = 0.1) -> DiscreteSpectrum:
    """1..max_count eigenvalues with Re in [-0.5, 0.5], Im in [0.15, 1.2], |Q_d| in [0.3, 5]."""
    n = int(rng.integers(1, max_count + 1))
    while True:
        lam = rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(0.15, 1.2, n)
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(n, np.inf))
        if n == 1 or gaps.min() > min_gap:
            break
    qd = rng.uniform(0.3, 5.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    return DiscreteSpectrum(lam, qd).sorted_by_imag()


def _match(expected: np.ndarray, found: np.ndarray) -> np.ndarray:
    """Index into ``found`` of the nearest partner of each expected eigenvalue."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(expected[:, None] - found[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)]


def _check_round_trip(spec: DiscreteSpectrum, args, label: str) -> int:
    kind = KernelKind.parse(args.kernel)
    rt = round_trip(spec, args.N or 4096, _search_region(args), kind, args.split, args.c, fb=args.fb,
                    t0_half_width=args.T0)
    found = rt.detected
    print(f"{label}: {len(spec)} eigenvalue(s), window centre {rt.centre:.4g}, "
          f"T0 {rt.pulse.t0_half_width:.4g}, N {rt.pulse.n_intervals}")
    if len(found) != len(spec):
        print(f"  count mismatch: expected {len(spec)}, detected {len(found)}")
        for lam in spec.eigenvalues:
            print(f"  expected {lam:.8g}")
        for lam in found.eigenvalues:
            print(f"  detected {lam:.8g}")
        return EXIT_COUNT
    if len(spec) == 0:
        print("  empty spectrum: pass")
        return 0
    idx = _match(spec.eigenvalues, found.eigenvalues)
    ok = True
    for k, j in enumerate(idx):
        lam, qd = spec.eigenvalues[k], spec.qd[k]
        err_lam = abs(found.eigenvalues[j] - lam)
        err_qd = abs(found.qd[j] - qd) / abs(qd)
        good = err_lam <= args.tol_lambda and err_qd <= args.tol_qd
        ok &= good
        print(f"  lambda {lam:.6g}: |dlambda| {err_lam:.3e}, |dQd|/|Qd| {err_qd:.3e}  "
              f"{'ok' if good else 'FAIL'}")
    return 0 if ok else EXIT_TOLERANCE


def cmd_roundtrip(args) -> int:
    if args.input is not None:
        return _check_round_trip(_load_spectrum(args.input).discrete, args, str(args.input))
    rng = np.random.default_rng(args.seed)
    worst = 0
    for k in range(args.random):
        code = _check_round_trip(random_spectrum(rng), args, f"random spectrum {k} (seed {args.seed})")
        # a count mismatch outranks a tolerance failure
        worst = max(worst, code, key=lambda c: (c == EXIT_COUNT, c))
    return worst


def convergence_rows(mode: str, ns=None, T=None):
    """Rows ``(N, kernel, quantity, value, error)`` for a scalar demo or the two-soliton sweep."""
    rows = []
    if mode in SCALAR_FUNCTIONS:
        f = SCALAR_FUNCTIONS[mode]
        T = 1.0 if T is None else T
        exact = 1.0 if mode == "zero" else None
        for N in ns or SCALAR_N:
            res = scalar_trapezoid_demo(f, T, N, exact)
            for name, value in res.values:
                rows.append((N, name, "x(T)", float(value), abs(float(value) - res.exact)))
        return rows
    if mode != "table1":
        raise ValueError(f"unknown convergence mode {mode!r}")
    spec = DiscreteSpectrum(np.array(TABLE_EIGENVALUES), np.array(TABLE_QD, dtype=complex))
    lam = spec.eigenvalues
    for N in ns or TABLE_N:
        pulse = synthesize(spec, TABLE_T0 if T is None else T, N, tail_tolerance=np.inf)
        for kind in KernelKind:
            for fb in (False, True):
                label = f"{kind.value}-fb" if fb else kind.value
                if fb:
                    r = fb_scatter_many(pulse, lam, kind, eigen=True)
                    a, b, ap = r.a, r.b, r.a_prime
                else:
                    a, b, ap, _ = forward_scatter_many(pulse, lam, kind)
                qd = b / ap
                for k, (z, target) in enumerate(zip(TABLE_EIGENVALUES, TABLE_QD)):
                    rows.append((N, label, f"qd({z.imag:g}j)", float(qd[k].real), abs(qd[k] - target)))
                rows.append((N, label, f"a({TABLE_EIGENVALUES[0].imag:g}j)", float(a[0].real), abs(a[0])))
    return rows


def cmd_convergence(args) -> int:
    ns = None
    if args.N is not None:
        ns = (args.N,)
    rows = convergence_rows(args.mode, ns, args.T0)
    lines = ["N,kernel,quantity,value,error"]
    lines += [f"{N},{k},{q},{_fmt(v)},{_fmt(e)}" for N, k, q, v, e in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_evolve(args) -> int:
    spec = _load_spectrum(args.input)
    out = evolve_spectrum(spec, args.z)
    doc = spectrum_to_dict(out, {"z": args.z})
    if args.out is None:
        print(json.dumps(doc, indent=2))
    else:
        write_spectrum_json(args.out, out, {"z": args.z})
    return 0


def _add_numerics(p, fb_default=True):
    p.add_argument("--kernel", default="trapezoid", choices=[k.value for k in KernelKind])
    p.add_argument("--fb", dest="fb", action="store_true", default=fb_default,
                   help="forward-backward scattering (default)")
    p.add_argument("--no-fb", dest="fb", action="store_false", help="plain forward scattering")
    p.add_argument("--split", default="fixed", choices=["fixed", "argmin"])
    p.add_argument("--c", type=float, default=0.5, help="split fraction for --split fixed")
    p.add_argument("--region", type=_region, default=None, metavar="re0:re1:im0:im1")
    p.add_argument("--seed-grid", type=_seed_grid, default=(8, 8), metavar="NRExNIM",
                   help="Newton seeds per axis of the search region")
    p.add_argument("--newton-tol", type=float, default=1e-12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nft-toolkit", description="Nonlinear Fourier transform toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nft", help="pulse CSV -> spectrum JSON")
    p.add_argument("input")
    _add_numerics(p)
    p.add_argument("--eigenvalues", type=_complex_list, metavar="L1,L2,...",
                   help="evaluate Q_d at these eigenvalues instead of searching")
    p.add_argument("--lambda-grid", type=_lambda_grid, default=_lambda_grid("-5:5:201"),
                   metavar="min:max:count")
    p.add_argument("--out")
    p.set_defaults(func=cmd_nft)

    p = sub.add_parser("inft", help="spectrum JSON -> pulse CSV")
    p.add_argument("input")
    p.add_argument("--N", type=int)
    p.add_argument("--T0", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_inft)

    p = sub.add_parser("roundtrip", help="synthesize, re-detect and compare")
    p.add_argument("input", nargs="?", help="spectrum JSON; omit to draw --random spectra")
    _add_numerics(p)
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--T0", type=float, help="fixed symmetric window (default: fitted to the pulse)")
    p.add_argument("--random", type=int, default=1, help="number of random spectra when no input is given")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-lambda", type=float, default=1e-4)
    p.add_argument("--tol-qd", type=float, default=0.01)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("convergence", help="error-vs-N CSV")
    p.add_argument("--mode", default="table1", choices=[*SCALAR_FUNCTIONS, "table1"])
    p.add_argument("--N", type=int, help="single N instead of the default sweep")
    p.add_argument("--T0", type=float, help="interval length (scalar) or half-width (table1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("evolve", help="propagate a spectrum JSON over distance z")
    p.add_argument("input")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)
    return parser


def _glue_negative_values(argv):
    """Turn ``--lambda-grid -2:2:5`` into ``--lambda-grid=-2:2:5`` so argparse does not see an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--lambda-grid", "--region"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    paths = [p for p in (getattr(args, "input", None), getattr(args, "out", None)) if p]
    if len(set(map(str, paths))) != len(paths):
        print("error: input and output paths must differ", file=sys.stderr)
        return EXIT_FORMAT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DuplicateEigenvalueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DUPLICATE
    except NFTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
