"""Command-line front end.

Every subcommand writes one artifact (CSV or JSON, plus sidecars for zero
tables).  Output goes to a temporary file first and is moved into place only
on success, so failures never leave partial artifacts behind.  Errors are
reported as ``error[<code>]: <message>`` on stderr with a nonzero exit status.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CompletenessError, DomainError, RankZetaError

log = logging.getLogger("rankzeta")

EXIT_CODES = {"parse": 2, "validation": 3, "singular-curve": 3, "wrong-reduction": 3,
              "domain": 4, "pole": 4, "dependency": 5, "precision": 6, "incomplete": 7,
              "completeness": 7, "consistency": 8, "inference": 9, "resource": 10}


# ---------------------------------------------------------------------------
# output plumbing

def _meta_lines(args, extra=None) -> str:
    conf = {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "out", "verbose") and v is not None}
    lines = [f"# rankzeta {__version__}", f"# command: {args.command}"]
    lines += [f"# {k}: {v}" for k, v in conf.items() if k != "command"]
    lines += [f"# {k}: {v}" for k, v in (extra or {}).items()]
    return "\n".join(lines) + "\n"


@contextmanager
def _artifact(path, sidecars=()):
    """Yield a temp path; move it (and sidecars) into place only on success."""
    if path is None:
        buf = tempfile.NamedTemporaryFile("w", delete=False, suffix=".out")
        buf.close()
        try:
            yield buf.name
            sys.stdout.write(Path(buf.name).read_text())
        finally:
            os.unlink(buf.name)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.part{os.getpid()}")
    try:
        yield str(tmp)
        for suffix in sidecars:
            side = Path(str(tmp) + suffix)
            if side.exists():
                os.replace(side, str(path) + suffix)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        for suffix in sidecars:
            Path(str(tmp) + suffix).unlink(missing_ok=True)
        raise


def _write_rows(path, header, rows, meta):
    with open(path, "w", newline="") as fh:
        fh.write(meta)
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                        for x in row])


def _grid(text: str) -> np.ndarray:
    """'a:b:step' inclusive of b when it lands on the grid."""
    try:
        a, b, h = (float(x) for x in text.split(":"))
    except ValueError:
        raise DomainError(f"expected a:b:step, got {text!r}") from None
    if h <= 0 or b < a:
        raise DomainError(f"bad grid {text!r}")
    n = int(math.floor((b - a) / h + 1e-9))
    return a + h * np.arange(n + 1)


def _curve(text):
    from .curve import get_curve
    return get_curve(text)


def _cache(args):
    if args.no_cache:
        return False
    return args.cache_dir or True


# ---------------------------------------------------------------------------
# subcommands

def cmd_aptable(args):
    from .curve import ap_table
    curve = _curve(args.curve)
    table = ap_table(curve, args.X, accelerate=args.accelerate, cache=_cache(args))
    rows = [(int(p), int(a), "bad" if b else "good")
            for p, a, b in zip(table.primes, table.values, table.bad)]
    with _artifact(args.out) as tmp:
        _write_rows(tmp, ["p", "a_p", "reduction"], rows,
                    _meta_lines(args, {"model": curve.name, "primes": len(rows)}))


def cmd_bias(args):
    from .bias import bias_report
    curve = _curve(args.curve)
    rep = bias_report(curve, args.X, ratio=args.ratio, accelerate=args.accelerate,
                      cache=_cache(args))
    with _artifact(args.out) as tmp:
        Path(tmp).write_text(rep.to_json())
    if args.checkpoints:
        with _artifact(args.checkpoints) as tmp:
            rep.write_csv(tmp)
            body = Path(tmp).read_text()
            Path(tmp).write_text(_meta_lines(args) + body)


def _target(args):
    """('zeta', None) | ('curve', spec) | ('chi', spec)."""
    from .lfunc import curve_spec, quadratic_spec
    chosen = [x is not None and x is not False for x in (args.curve, args.d, args.zeta)]
    if sum(chosen) != 1:
        raise DomainError("give exactly one of --curve, --d, --zeta")
    if args.zeta:
        return "zeta", None
    if args.d is not None:
        return "chi", quadratic_spec(args.d)
    return "curve", curve_spec(_curve(args.curve), cache=_cache(args))


def cmd_zplot(args):
    from .lfunc import MellinGrid
    from .zeta import hardy_Z_zeta_array
    t = _grid(args.t)
    kind, spec = _target(args)
    if kind == "zeta":
        z = hardy_Z_zeta_array(t)
        label = "zeta"
    else:
        z = MellinGrid(spec, float(np.max(np.abs(t))) + 1.0).Z(t)
        label = spec.label
    with _artifact(args.out) as tmp:
        _write_rows(tmp, ["t", "Z"], zip(t, z), _meta_lines(args, {"function": label}))


def cmd_zeros(args):
    from .lfunc import find_zeros, write_lzeros
    from .zeta import write_zero_table, zeta_zeros
    kind, spec = _target(args)
    if kind == "zeta":
        if (args.T is None) == (args.count is None):
            raise DomainError("zeta zeros need exactly one of --T, --count")
        zl = zeta_zeros(args.T, count=args.count)
        meta = {"label": "zeta", "height": zl.height, "complete": zl.complete, "count": len(zl)}
        writer = lambda p: write_zero_table(p, zl, meta)
    else:
        if args.T is None:
            raise DomainError("--T is required for L-function zeros")
        zl = find_zeros(spec, args.T)
        writer = lambda p: write_lzeros(p, zl)
    if args.out is None:
        raise DomainError("zeros needs --out (a table plus a .json sidecar)")
    with _artifact(args.out, sidecars=(".json",)) as tmp:
        writer(tmp)


def _family(args, sign):
    from .arith import enumerate_fundamental_discriminants
    from .lfunc import family_zeros
    lo, hi = (0, args.X) if sign == "positive" else (-args.X, 0)
    ds = enumerate_fundamental_discriminants(lo, hi, sign).tolist()
    progress = (lambda i, n: log.info("%s: %d/%d", sign, i, n)) if args.verbose else None
    fam = family_zeros(ds, args.T, progress=progress)
    bad = [d for d, z in fam.items() if not z.complete]
    if bad:
        raise CompletenessError(f"{len(bad)} members failed certification, first d={bad[0]}")
    return fam


def cmd_density(args):
    from .predict import FamilyMoments, bin_average, cs_density_average
    from .stats import discrepancy, make_bins, one_level_density
    fam = _family(args, args.sign)
    top = args.T
    if args.mode == "rescaled":
        # every member must be complete over the scaled range
        top = args.T * min(math.log(abs(d)) for d in fam) / (2 * math.pi)
    bins = make_bins(0.0, args.bin * math.floor(top / args.bin + 1e-9), args.bin)
    hist = one_level_density(fam, bins, args.mode)
    mom = FamilyMoments(list(fam))
    if args.mode == "raw":
        full = bin_average(lambda x: cs_density_average(mom, x), hist.edges)
        lead = np.full(len(full), mom.mean_log / (2 * math.pi))
        l2f, l2l = discrepancy(hist, full)[0], discrepancy(hist, lead)[0]
        extra = {"members": len(fam), "L2_full": l2f, "L2_leading": l2l}
    else:
        from .predict import kernel_symplectic
        full = bin_average(kernel_symplectic, hist.edges)
        lead = np.ones(len(full))
        extra = {"members": len(fam), "L2_symplectic": discrepancy(hist, full)[0]}
    e = hist.edges
    rows = zip(e[:-1], e[1:], hist.values, full, lead)
    with _artifact(args.out) as tmp:
        _write_rows(tmp, ["bin_left", "bin_right", "value", "prediction", "leading"], rows,
                    _meta_lines(args, extra))


def _zeta_list(args):
    from .zeta import read_zero_table, zeta_zeros
    if args.zeros:
        return read_zero_table(args.zeros)
    if args.count is None:
        raise DomainError("give --zeros FILE or --count N")
    return zeta_zeros(count=args.count)


def cmd_paircorr(args):
    from scipy import integrate
    from .predict import cs_paircorr_prediction, kernel_gue_pc, paircorr_main_term
    from .stats import discrepancy, make_bins, pair_correlation
    zl = _zeta_list(args)
    gam = np.asarray(zl.ordinates)
    bins = make_bins(args.lo, args.hi, args.bin)
    hist = pair_correlation(gam, bins, args.mode)
    e = hist.edges
    if args.mode == "raw":
        T = float(gam.max())
        pred = np.array([cs_paircorr_prediction(T, (e[i], e[i + 1]))
                         for i in range(len(e) - 1)]) / hist.bin_width
        lead = np.full(len(pred), paircorr_main_term(T))
        extra = {"zeros": len(gam), "T": T, "L2_full": discrepancy(hist, pred)[0],
                 "L2_main": discrepancy(hist, lead)[0]}
    else:
        pred = np.array([integrate.quad(lambda x: float(kernel_gue_pc(x)), e[i], e[i + 1])[0]
                         for i in range(len(e) - 1)]) / hist.bin_width
        lead = np.ones(len(pred))
        extra = {"zeros": len(gam), "L2_gue": discrepancy(hist, pred)[0]}
    rows = zip(e[:-1], e[1:], hist.values, pred, lead)
    with _artifact(args.out) as tmp:
        _write_rows(tmp, ["bin_left", "bin_right", "value", "prediction", "main"], rows,
                    _meta_lines(args, extra))


def cmd_predict(args):
    from . import predict as P
    x = _grid(args.x)
    k = args.kind
    if k == "rank-ratio":
        if args.curve is None:
            raise DomainError("rank-ratio needs --curve")
        curve = _curve(args.curve)
        r = args.rank if args.rank is not None else curve.rank
        if r is None:
            raise DomainError("rank unknown; pass --rank")
        y = P.rank_ratio_prediction(curve, r, x)
    elif k == "density":
        if args.d is not None:
            y = P.cs_density_integrand(args.d, x)
        else:
            from .arith import enumerate_fundamental_discriminants
            lo, hi = (0, args.X) if args.sign == "positive" else (-args.X, 0)
            ds = enumerate_fundamental_discriminants(lo, hi, args.sign).tolist()
            y = P.cs_density_average(P.FamilyMoments(ds), x)
    elif k == "paircorr":
        if args.T is None:
            raise DomainError("paircorr prediction needs --T")
        y = P.cs_paircorr_density(args.T, x)
    elif k == "gue":
        y = P.kernel_gue_pc(x)
    else:
        y = P.kernel_symplectic(x)
    curve_ = P.PredictionCurve(x, y, k)
    with _artifact(args.out) as tmp:
        curve_.write_csv(tmp)
        Path(tmp).write_text(_meta_lines(args) + Path(tmp).read_text())


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankzeta", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rankzeta {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", "-o", help="output path (stdout when omitted)")
        p.add_argument("--cache-dir", help="a(p) cache directory (default $RANKZETA_CACHE "
                       "or ~/.cache/rankzeta)")
        p.add_argument("--no-cache", action="store_true", help="neither read nor write caches")
        p.add_argument("--verbose", "-v", action="store_true")
        return p

    def target(p):
        p.add_argument("--curve", help="alias (E1..E7, E11, E24, E15) or '[a1,a2,a3,a4,a6] N=.. r=..'")
        p.add_argument("--d", type=int, help="fundamental discriminant for chi_d")
        p.add_argument("--zeta", action="store_true", help="the Riemann zeta function")

    p = common(sub.add_parser("aptable", help="a(p) for p <= X"))
    p.add_argument("--curve", required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--accelerate", action="store_true")
    p.set_defaults(func=cmd_aptable)

    p = common(sub.add_parser("bias", help="logarithmic-density bias report (JSON)"))
    p.add_argument("--curve", required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--ratio", type=float, default=1.1, help="checkpoint grid ratio")
    p.add_argument("--checkpoints", help="also write (x, S_E, bias-to-date) CSV here")
    p.add_argument("--accelerate", action="store_true")
    p.set_defaults(func=cmd_bias)

    p = common(sub.add_parser("zplot", help="Hardy Z on a grid"))
    target(p)
    p.add_argument("--t", required=True, help="a:b:step")
    p.set_defaults(func=cmd_zplot)

    p = common(sub.add_parser("zeros", help="certified zero list"))
    target(p)
    p.add_argument("--T", type=float)
    p.add_argument("--count", type=int, help="zeta only: first N zeros")
    p.set_defaults(func=cmd_zeros)

    p = common(sub.add_parser("density", help="one-level density of chi_d zeros vs prediction"))
    p.add_argument("--sign", choices=("positive", "negative"), default="positive")
    p.add_argument("--X", type=int, default=10 ** 5, help="|d| < X")
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--bin", type=float, default=0.05)
    p.add_argument("--mode", choices=("raw", "rescaled"), default="raw")
    p.set_defaults(func=cmd_density)

    p = common(sub.add_parser("paircorr", help="pair correlation of zeta zeros vs prediction"))
    p.add_argument("--zeros", help="zero table, one ordinate per line")
    p.add_argument("--count", type=int, help="compute the first N zeros instead")
    p.add_argument("--mode", choices=("raw", "montgomery", "unfolded"), default="raw")
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=20.0)
    p.add_argument("--bin", type=float, default=1 / 40)
    p.set_defaults(func=cmd_paircorr)

    p = common(sub.add_parser("predict", help="prediction curves"))
    p.add_argument("--kind", required=True,
                   choices=("rank-ratio", "density", "paircorr", "gue", "symplectic"))
    p.add_argument("--x", required=True, help="abscissae a:b:step")
    p.add_argument("--curve")
    p.add_argument("--rank", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--sign", choices=("positive", "negative"), default="positive")
    p.add_argument("--X", type=int, default=10 ** 5)
    p.add_argument("--T", type=float)
    p.set_defaults(func=cmd_predict)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        args.func(args)
    except RankZetaError as exc:
        code = getattr(exc, "code", "error")
        print(f"error[{code}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(code, 1)
    except (ValueError, OSError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
