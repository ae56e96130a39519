"""Command-line interface: embed, extract, analyze, bench and inspection tools.

Exit codes: 0 success, 1 usage, 2 data or capacity problem, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import codec, metrics
from .basis import BasisId, BasisParams, build_kernel, gram_deviation, pair_label, parse_pair, recurrence_residual
from .chaos import BetaParams, beta_orbit, chaotic_positions
from .imageio import DimensionError, ImageFormatError, load_image, save_image
from .keyschedule import expansion_bytes, generate_key, parse_key
from .transform import ZIGZAG, hilbert_order

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

BENCH_PAIRS = ("T", "MT", "MDCT", "qCT", "qCDCT", "qMT", "qMDCT", "DCT")
BENCH_COLUMNS = ("image", "basis_pair", "mu", "payload_bits", "psnr", "uiqi", "if", "re", "ber", "runtime_ms")
BENCH_KEY = "000102030405060708090a0b0c0d0e0f"
IMAGE_SUFFIXES = {".png", ".bmp"}
BETA_NAMES = ("x0", "a", "b1", "c1", "b2", "c2", "phi1", "phi2", "r")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# argument parsing helpers -----------------------------------------------


def parse_beta(tuple_text: str | None, config_path: str | None) -> BetaParams:
    if tuple_text and config_path:
        raise UsageError("give either --beta or --beta-config, not both")
    if tuple_text:
        try:
            return BetaParams.from_sequence(v for v in tuple_text.split(","))
        except ValueError as e:
            raise UsageError(f"--beta: {e}") from None
    if config_path:
        return read_beta_config(config_path)
    return BetaParams()


def read_beta_config(path) -> BetaParams:
    """``name = value`` lines; ``#`` starts a comment; unspecified names keep defaults."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read beta config: {e}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = (part.strip() for part in line.partition("="))
        if not sep or name not in BETA_NAMES:
            raise UsageError(f"{path}:{lineno}: expected one of {', '.join(BETA_NAMES)} = value")
        try:
            values[name] = float(value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: {value!r} is not a number") from None
    try:
        return BetaParams(**values)
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


def parse_basis_params(items) -> BasisParams:
    values = {}
    fields = BasisParams.__dataclass_fields__
    for item in items or ():
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in fields or name == "support_size":
            raise UsageError(f"--basis-param expects name=value with name in {', '.join(f for f in fields if f != 'support_size')}")
        try:
            values[name] = float(value)
        except ValueError:
            raise UsageError(f"--basis-param {name}: {value!r} is not a number") from None
    try:
        return BasisParams(**values)
    except ValueError as e:
        raise UsageError(f"--basis-param: {e}") from None


def _key(text):
    if text is None:
        raise UsageError("a key is required (--key, 32 hex characters)")
    try:
        return parse_key(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def stego_config(args, framing=None) -> codec.StegoConfig:
    try:
        bx, by = parse_pair(args.basis)
    except ValueError as e:
        raise UsageError(f"--basis: {e}") from None
    try:
        return codec.StegoConfig(
            key=_key(args.key),
            basis_x=bx,
            basis_y=by,
            basis_params=parse_basis_params(args.basis_param),
            mu=args.mu,
            beta=parse_beta(args.beta, args.beta_config),
            framing=framing or args.framing,
            process_all_blocks=getattr(args, "all_blocks", False),
            refine_max_iters=getattr(args, "refine", 16),
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load(path):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return load_image(path)
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except (ImageFormatError, OSError) as e:
        raise DataError(str(e)) from None


# subcommands ---------------------------------------------------------------


def cmd_embed(args) -> int:
    cfg = stego_config(args)
    cover = _load(args.cover)
    try:
        payload = Path(args.message).read_bytes()
    except OSError as e:
        raise DataError(f"cannot read message: {e}") from None
    try:
        stego, report = codec.embed_payload(cover, payload, cfg)
    except (codec.CapacityError, DimensionError) as e:
        raise DataError(str(e)) from None
    try:
        save_image(stego, args.out)
    except ImageFormatError as e:
        raise UsageError(str(e)) from None
    print(report.to_text())
    print(f"basis_pair: {cfg.pair}")
    print(f"mu: {cfg.mu}")
    limit = args.max_unstable * max(report.blocks_touched, 1)
    if len(report.unstable_blocks) > limit:
        print(
            f"error: {len(report.unstable_blocks)} unstable blocks exceed the allowed "
            f"{args.max_unstable:.2%} of {report.blocks_touched} touched blocks",
            file=sys.stderr,
        )
        return EXIT_DATA
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = stego_config(args)
    if cfg.framing == "raw" and args.length is None:
        raise UsageError("raw framing needs --length (message length in bits)")
    stego = _load(args.stego)
    try:
        payload = codec.extract_payload(stego, cfg, args.length)
    except (codec.FramingError, codec.CapacityError, DimensionError) as e:
        raise DataError(str(e)) from None
    Path(args.out).write_bytes(payload)
    print(f"bytes_written: {len(payload)}")
    print(
        "warning: the scheme carries no integrity check; a wrong key or parameter set yields garbage silently",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    c, s = _load(args.cover), _load(args.stego)
    if c.samples.shape != s.samples.shape:
        raise DataError(f"shape mismatch: {c.samples.shape} vs {s.samples.shape}")
    print(metrics.analyze(c, s, args.peak).to_text())
    return EXIT_OK


def cmd_keygen(args) -> int:
    print(generate_key().hex())
    return EXIT_OK


def cmd_expand_key(args) -> int:
    print(expansion_bytes(_key(args.key)).hex())
    return EXIT_OK


def cmd_chaos_dump(args) -> int:
    beta = parse_beta(args.beta, args.beta_config)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    values = beta_orbit(beta, args.n) if args.orbit else chaotic_positions(range(1, args.n + 1), beta)
    print("\n".join(map(str, values)))
    return EXIT_OK


def cmd_basis_dump(args) -> int:
    try:
        basis = BasisId.parse(args.basis)
    except ValueError as e:
        raise UsageError(str(e)) from None
    prm = parse_basis_params(args.basis_param)
    try:
        K = build_kernel(basis, prm)
    except ValueError as e:
        raise DataError(str(e)) from None
    for row in K.entries:
        print(",".join(f"{v:.17g}" for v in row))
    print(f"# basis: {basis.name} ({basis.abbrev})", file=sys.stderr)
    print(f"# gram_deviation: {gram_deviation(K):.3e}", file=sys.stderr)
    if basis != BasisId.DCT:
        print(f"# recurrence_residual: {recurrence_residual(K):.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_scan_dump(args) -> int:
    if args.which in ("zigzag", "both"):
        print("zigzag: " + " ".join(str(i) for i in ZIGZAG))
    if args.which in ("hilbert", "both"):
        print("hilbert: " + " ".join(str(i) for i in hilbert_order()))
    return EXIT_OK


def cmd_capacity(args) -> int:
    if args.image:
        img = _load(args.image)
        try:
            bits = codec.capacity(img)
        except DimensionError as e:
            raise DataError(str(e)) from None
    elif args.size:
        try:
            w, h = (int(v) for v in args.size.lower().split("x"))
        except ValueError:
            raise UsageError("--size expects WIDTHxHEIGHT") from None
        try:
            bits = codec.capacity((w, h, args.channels))
        except ValueError as e:
            raise DataError(str(e)) from None
    else:
        raise UsageError("give an image path or --size")
    print(f"capacity_bits: {bits}")
    print(f"payload_bytes_header32: {max(bits - codec.HEADER_BITS, 0) // 8}")
    return EXIT_OK


# benchmark harness ---------------------------------------------------------


def dataset_images(directory):
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"{directory}: not a directory")
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def bench_rows(images, pairs, key, mu=75.0, beta=None, seed=0, basis_params=None, log=None):
    """Full-capacity embed/extract per image and basis pair; yields one dict per run."""
    beta = beta or BetaParams()
    basis_params = basis_params or BasisParams()
    for i, path in enumerate(images):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cover = load_image(path)
            cap = codec.capacity(cover)
        except (ImageFormatError, DimensionError, OSError) as e:
            if log:
                log(f"warning: skipping {path}: {e}")
            continue
        bits = np.random.default_rng([seed, i]).integers(0, 2, cap, dtype=np.uint8)
        for bx, by in pairs:
            cfg = codec.StegoConfig(
                key=key, basis_x=bx, basis_y=by, basis_params=basis_params,
                mu=mu, beta=beta, framing="raw",
            )
            t0 = time.perf_counter()
            stego, _ = codec.embed(cover, bits, cfg)
            got = codec.extract(stego, cfg, cap)
            ms = 1000.0 * (time.perf_counter() - t0)
            m = metrics.analyze(cover, stego)
            yield {
                "image": Path(path).name,
                "basis_pair": pair_label(bx, by),
                "mu": mu,
                "payload_bits": cap,
                "psnr": m.psnr_db,
                "uiqi": m.uiqi,
                "if": m.image_fidelity,
                "re": m.relative_entropy,
                "ber": codec.bit_error_rate(bits, got),
                "runtime_ms": round(ms, 3),
            }


def summarize(rows):
    """Per basis pair: median and quartiles of PSNR and RE, plus the DCT comparison flag."""
    by_pair = {}
    for r in rows:
        by_pair.setdefault(r["basis_pair"], []).append(r)
    summary = {}
    for pair, rs in by_pair.items():
        entry = {"n": len(rs)}
        for col in ("psnr", "re", "uiqi", "ber"):
            v = np.array([float(r[col]) for r in rs])
            q1, med, q3 = np.percentile(v, [25, 50, 75])
            entry[col] = (float(q1), float(med), float(q3))
        summary[pair] = entry
    dct = summary.get("DCT")
    flag = None
    if dct is not None:
        flag = any(e["psnr"][1] >= dct["psnr"][1] for p, e in summary.items() if p != "DCT")
    return summary, flag


def format_summary(summary, flag) -> str:
    lines = ["basis_pair n psnr_q1 psnr_median psnr_q3 re_median uiqi_median ber_median"]
    for pair, e in summary.items():
        p, r, u, b = e["psnr"], e["re"], e["uiqi"], e["ber"]
        lines.append(f"{pair} {e['n']} {p[0]:.4f} {p[1]:.4f} {p[2]:.4f} {r[1]:.6f} {u[1]:.6f} {b[1]:.6f}")
    if flag is None:
        lines.append("moment_pair_meets_dct_median_psnr: n/a (DCT pair not benchmarked)")
    else:
        lines.append(f"moment_pair_meets_dct_median_psnr: {'yes' if flag else 'no'}")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    images = dataset_images(args.dataset)
    if not images:
        raise DataError(f"{args.dataset}: no PNG or BMP images")
    names = list(args.pairs or BENCH_PAIRS)
    names += args.extra_pair or []
    try:
        pairs = list(dict.fromkeys(parse_pair(n) for n in names))
    except ValueError as e:
        raise UsageError(str(e)) from None
    beta = parse_beta(args.beta, args.beta_config)
    key = _key(args.key or BENCH_KEY)
    if not 50 < args.mu < 100:
        raise UsageError("--mu must lie in (50, 100)")
    log = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    rows = []
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in bench_rows(images, pairs, key, args.mu, beta, args.seed, parse_basis_params(args.basis_param), log):
            writer.writerow(row)
            out.flush()
            rows.append(row)
    finally:
        if args.csv:
            out.close()
    if not rows:
        log("error: every image failed")
        return EXIT_DATA
    summary, flag = summarize(rows)
    print(format_summary(summary, flag), file=sys.stderr if not args.csv else sys.stdout)
    return EXIT_OK


# parser ----------------------------------------------------------------------


def _stego_flags(p, framing=True):
    p.add_argument("--key", help="128-bit key as 32 hex characters")
    p.add_argument("--basis", default="DCT", help="basis pair, e.g. DCT, MT, qM,DCT (default DCT)")
    p.add_argument("--basis-param", action="append", metavar="NAME=VALUE", help="override a basis parameter")
    p.add_argument("--mu", type=float, default=75.0, help="quality factor in (50, 100) (default 75)")
    _beta_flags(p)
    if framing:
        p.add_argument("--framing", choices=("header32", "raw"), default="header32")


def _beta_flags(p):
    p.add_argument("--beta", metavar="x0,a,b1,c1,b2,c2,phi1,phi2,r", help="chaotic map parameters")
    p.add_argument("--beta-config", metavar="FILE", help="chaotic map parameters as name = value lines")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="orthosteg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="hide a file in a cover image")
    p.add_argument("cover")
    p.add_argument("message", help="file whose bytes are the payload")
    p.add_argument("-o", "--out", required=True, help="stego image (.png or .bmp)")
    _stego_flags(p)
    p.add_argument("--all-blocks", action="store_true", help="requantize every block, not only carriers")
    p.add_argument("--refine", type=int, default=16, help="max verification re-embeds per block (0..64)")
    p.add_argument("--max-unstable", type=float, default=0.01, help="allowed fraction of unstable blocks")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a payload from a stego image")
    p.add_argument("stego")
    p.add_argument("-o", "--out", required=True, help="file receiving the payload bytes")
    p.add_argument("--length", type=int, help="message length in bits (raw framing)")
    _stego_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="quality metrics between cover and stego")
    p.add_argument("cover")
    p.add_argument("stego")
    p.add_argument("--peak", type=float, help="fixed PSNR peak instead of the data maximum")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="full-capacity benchmark over a directory of images")
    p.add_argument("dataset")
    p.add_argument("--csv", help="CSV output path (default stdout)")
    p.add_argument("--pairs", nargs="+", help=f"basis pairs (default {' '.join(BENCH_PAIRS)})")
    p.add_argument("--extra-pair", action="append", help="basis pair added to the list")
    p.add_argument("--key", help=f"key (default {BENCH_KEY})")
    p.add_argument("--mu", type=float, default=75.0)
    p.add_argument("--seed", type=int, default=0, help="message RNG seed")
    p.add_argument("--basis-param", action="append", metavar="NAME=VALUE")
    _beta_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("keygen", help="print a random 128-bit key")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("expand-key", help="print the 2560-bit key expansion as hex")
    p.add_argument("--key")
    p.set_defaults(func=cmd_expand_key)

    p = sub.add_parser("chaos-dump", help="print chaotic positions of 1..n")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--orbit", action="store_true", help="print raw orbit values instead")
    _beta_flags(p)
    p.set_defaults(func=cmd_chaos_dump)

    p = sub.add_parser("basis-dump", help="print an 8x8 kernel matrix and its checks")
    p.add_argument("basis", help="id 1..10, abbreviation or name")
    p.add_argument("--basis-param", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=cmd_basis_dump)

    p = sub.add_parser("scan-dump", help="print zigzag and Hilbert orders")
    p.add_argument("--which", choices=("zigzag", "hilbert", "both"), default="both")
    p.set_defaults(func=cmd_scan_dump)

    p = sub.add_parser("capacity", help="embedding capacity of an image or size")
    p.add_argument("image", nargs="?")
    p.add_argument("--size", help="WIDTHxHEIGHT")
    p.add_argument("--channels", type=int, choices=(1, 3), default=3)
    p.set_defaults(func=cmd_capacity)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # invariant breach
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
