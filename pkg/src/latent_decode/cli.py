"""``latent-decode`` command line.

Every subcommand accepts ``--config PATH``: a UTF-8 ``key=value`` file whose
keys are that subcommand's flag names (``-`` or ``_``), with ``#`` comments.
Flags given on the command line override file values; unknown keys are
errors.

Exit codes: 0 success, 1 validation or numerical failure, 2 I/O failure.
Results go to stdout as ``key=value`` lines; diagnostics and warnings go to
stderr. ``LATENT_DECODE_THREADS`` caps BLAS threads.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

from . import dataio, eigenimage, linmap, metrics, roi, synth
from .errors import ConfigInvalid, DecodeWarning, FormatError, LatentDecodeError, ShapeMismatch

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(LatentDecodeError):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.late_defaults = {}
        self.required_dests = []

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def opt(self, *flags, required=False, default=None, **kwargs):
        # real defaults are applied after the config file is merged
        action = self.add_argument(*flags, default=None, **kwargs)
        if required:
            self.required_dests.append(action.dest)
        if default is not None:
            self.late_defaults[action.dest] = default
        return action


def _out(**pairs):
    for key, value in pairs.items():
        print(f"{key}={value}")


def _parse_bool(key, value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigInvalid(f"config key {key!r}: expected a boolean, got {value!r}")


def _merge_config(parser, args):
    actions = {a.dest: a for a in parser._actions
               if a.dest not in ("help", "config") and a.option_strings}
    if args.config is not None:
        for key, raw in dataio.read_kv(args.config).items():
            dest = key.replace("-", "_")
            action = actions.get(dest)
            if action is None:
                raise ConfigInvalid(f"{args.config}: unknown key {key!r} for '{parser.prog}'")
            if getattr(args, dest) is not None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                value = _parse_bool(key, raw)
            elif action.type is not None:
                try:
                    value = action.type(raw)
                except (TypeError, ValueError):
                    raise ConfigInvalid(f"{args.config}: bad value for {key!r}: {raw!r}") from None
            else:
                value = raw
            setattr(args, dest, value)
    for dest, action in actions.items():
        if getattr(args, dest) is None:
            if isinstance(action, argparse._StoreTrueAction):
                setattr(args, dest, False)
            elif dest in parser.late_defaults:
                setattr(args, dest, parser.late_defaults[dest])
    missing = [actions[d].option_strings[0] for d in parser.required_dests if getattr(args, d) is None]
    if missing:
        raise UsageError(f"{parser.prog}: missing required option(s): {', '.join(missing)}")


def _write_matrix(m, path, fmt=None):
    dataio.ensure_parent(path)
    dataio.write_matrix(m, path, fmt)


# ---------------------------------------------------------------- commands


def cmd_fit(args):
    latents = dataio.read_matrix(args.latents, args.format)
    responses = dataio.read_matrix(args.responses, args.format)
    if latents.shape[0] != responses.shape[0]:
        raise ShapeMismatch(f"latents are {latents.shape[0]}x{latents.shape[1]} but responses are "
                            f"{responses.shape[0]}x{responses.shape[1]}; row counts must match")
    emap = linmap.fit_encoder(linmap.augment_bias(latents), responses, args.ridge)
    emap.save(args.out)
    _out(n_samples=latents.shape[0], latent_dim=emap.latent_dim, n_voxels=emap.n_voxels,
         w_shape=f"{emap.w.shape[0]}x{emap.w.shape[1]}", ridge_lambda=repr(emap.ridge_lambda),
         fit_residual_rms=repr(emap.fit_residual_rms))


def cmd_decode(args):
    emap = linmap.EncoderMap.load(args.map)
    responses = dataio.read_matrix(args.responses, args.format)
    opts = linmap.DecodeOptions(center_test=not args.no_center, rescale=not args.no_rescale,
                                drop_bias=not args.keep_bias)
    pred = linmap.decode_latents(emap, responses, opts)
    _write_matrix(pred, args.out, args.format)
    _out(rows=pred.shape[0], cols=pred.shape[1], out=args.out)


def _report(report, csv_path):
    sys.stdout.write(report.to_text())
    if csv_path:
        dataio.ensure_parent(csv_path)
        metrics.write_report_csv(report, csv_path)


def cmd_eval_pairwise(args):
    v = dataio.read_matrix(args.original, args.format)
    p = dataio.read_matrix(args.predicted, args.format)
    _report(metrics.pairwise_decoding_accuracy(v, p), args.csv)


def cmd_eval_pixcomp(args):
    orig = dataio.read_image_set(args.orig_dir)
    recon = dataio.read_image_set(args.recon_dir)
    _report(metrics.pixcomp(orig, recon), args.csv)


def cmd_eval_feature_dist(args):
    f_orig = dataio.read_matrix(args.orig, args.format)
    f_recon = dataio.read_matrix(args.recon, args.format)
    dist = metrics.feature_distance(f_orig, f_recon)
    _out(items=f_orig.shape[0], distance=f"{dist:.6f}")
    if args.csv:
        dataio.ensure_parent(args.csv)
        Path(args.csv).write_text(f"item_count,distance\n{f_orig.shape[0]},{dist!r}\n", encoding="utf-8")


def cmd_pca_fit(args):
    images = dataio.read_image_set(args.images)
    model = eigenimage.fit_pca(images, args.k)
    model.save(args.out)
    _out(n_images=len(images), n_pixels=model.n_pixels, k=model.k,
         height=model.height, width=model.width, channels=model.channels,
         explained_variance_total=repr(float(model.explained_variance.sum())))


def cmd_pca_transform(args):
    model = eigenimage.EigenImageModel.load(args.model)
    images = dataio.read_image_set(args.images)
    if images.geometry != (model.height, model.width, model.channels):
        raise FormatError(f"images are {images.geometry}, model expects "
                          f"{(model.height, model.width, model.channels)}")
    coeffs = eigenimage.project(model, images.images)
    _write_matrix(coeffs, args.out, args.format)
    _out(rows=coeffs.shape[0], cols=coeffs.shape[1], out=args.out)


def cmd_pca_reconstruct(args):
    model = eigenimage.EigenImageModel.load(args.model)
    coeffs = dataio.read_matrix(args.coeffs, args.format)
    pixels = eigenimage.reconstruct(model, coeffs, clamp=True)
    paths = dataio.write_image_set(eigenimage.to_image_set(model, pixels), args.out_dir)
    _out(images=len(paths), out_dir=args.out_dir)


def cmd_roi_select(args):
    y = dataio.read_matrix(args.responses, args.format)
    mask = dataio.read_roi_mask(args.mask)
    sub = roi.select_voxels(y, mask)
    _write_matrix(sub, args.out, args.format)
    _out(roi=mask.name, rows=sub.shape[0], cols=sub.shape[1], out=args.out)


def cmd_roi_union(args):
    paths = [p for p in args.masks.split(",") if p]
    merged = roi.union_masks([dataio.read_roi_mask(p) for p in paths], args.name)
    dataio.ensure_parent(args.out)
    dataio.write_roi_mask(merged, args.out)
    _out(roi=merged.name, voxels=len(merged), out=args.out)


_SYNTH_KEYS = ("n_train", "n_test", "latent_dim", "n_voxels", "noise_sigma", "seed", "n_groups")


def _synth_config(args):
    given = {k: getattr(args, k) for k in _SYNTH_KEYS if getattr(args, k, None) is not None}
    return synth.SynthConfig.from_mapping(given)


def cmd_synth_generate(args):
    ds = synth.generate(_synth_config(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "latents_train": ds.latents_train,
        "latents_test": ds.latents_test,
        "responses_train": ds.y_train,
        "responses_test": ds.y_test,
        "w_true": ds.w_true,
    }
    for name, m in files.items():
        dataio.write_matrix(m, out / f"{name}.ldm", "ldm")
    mask_files = []
    for mask in ds.voxel_groups:
        fname = f"roi_{mask.name}.txt"
        dataio.write_roi_mask(mask, out / fname)
        mask_files.append(fname)
    manifest = {f"config.{k}": repr(v) if isinstance(v, float) else v
                for k, v in ds.config.as_dict().items()}
    manifest.update({name: f"{name}.ldm" for name in files})
    manifest["roi_masks"] = ",".join(mask_files)
    dataio.write_kv(manifest, out / "manifest.txt")
    _out(out_dir=args.out_dir, **{k: v for k, v in manifest.items() if k.startswith("config.")})


def cmd_synth_sweep(args):
    try:
        sigmas = [float(s) for s in args.sigmas.split(",") if s.strip()]
    except ValueError:
        raise ConfigInvalid(f"--sigmas must be a comma-separated list of numbers, got {args.sigmas!r}") from None
    result = synth.noise_sweep(_synth_config(args), sigmas, args.reps)
    dataio.ensure_parent(args.out)
    result.write_csv(args.out)
    for sigma, mean, std in result.summary:
        print(f"sigma={sigma!r} mean_accuracy={mean:.6f} std_accuracy={std:.6f}")


def cmd_report(args):
    entries = [e for e in args.pairs.split(",") if e.strip()]
    if not entries:
        raise UsageError("--pairs is empty; expected NAME=FILE,...")
    rows = []
    for entry in entries:
        name, sep, path = entry.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--pairs entry {entry!r} is not NAME=FILE")
        rows.append((name, metrics.PairwiseReport.read(path)))
    if args.sort == "accuracy":
        rows.sort(key=lambda r: -r[1].accuracy)
    header = ("region", "items", "pairs", "correct", "ties", "accuracy")
    lines = [",".join(header)] + [",".join([n] + [str(x) for x in r.csv_row()]) for n, r in rows]
    dataio.ensure_parent(args.out)
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    width = max(len("region"), *(len(n) for n, _ in rows))
    print(f"{'region':<{width}}  {'items':>6}  {'pairs':>7}  {'correct':>7}  {'ties':>5}  accuracy")
    for name, r in rows:
        print(f"{name:<{width}}  {r.n_items:>6}  {r.n_pairs:>7}  {r.n_correct:>7}  {r.n_ties:>5}  {r.accuracy:.6f}")


# ---------------------------------------------------------------- parser


def _leaf(subparsers, name, func, help_text):
    p = subparsers.add_parser(name, help=help_text, description=help_text)
    p.add_argument("--config", metavar="PATH", help="key=value file of flag values")
    p.set_defaults(func=func, leaf=p)
    return p


def _format_opt(p):
    p.opt("--format", choices=("csv", "ldm"), help="matrix file format (default: by extension)")


def build_parser():
    parser = _Parser(prog="latent-decode",
                     description="Linear latent-space decoding of brain responses.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = _leaf(sub, "fit", cmd_fit, "fit the latent-to-voxel encoder map")
    p.opt("--latents", metavar="PATH", required=True, help="n x d training latents")
    p.opt("--responses", metavar="PATH", required=True, help="n x nv training responses")
    p.opt("--out", metavar="PREFIX", required=True, help="output prefix for the map files")
    p.opt("--ridge", type=float, default=0.0, help="ridge penalty on latent rows (default 0)")
    _format_opt(p)

    p = _leaf(sub, "decode", cmd_decode, "predict latent vectors from responses")
    p.opt("--map", metavar="PREFIX", required=True)
    p.opt("--responses", metavar="PATH", required=True)
    p.opt("--out", metavar="PATH", required=True)
    p.opt("--no-center", action="store_true", help="skip test-set centering")
    p.opt("--no-rescale", action="store_true", help="skip rescaling to training latent stats")
    p.opt("--keep-bias", action="store_true", help="keep the bias column in the output")
    _format_opt(p)

    ev = sub.add_parser("eval", help="evaluation metrics").add_subparsers(
        dest="metric", required=True, parser_class=_Parser)
    p = _leaf(ev, "pairwise", cmd_eval_pairwise, "pairwise decoding accuracy")
    p.opt("--original", metavar="PATH", required=True)
    p.opt("--predicted", metavar="PATH", required=True)
    p.opt("--csv", metavar="PATH")
    _format_opt(p)
    p = _leaf(ev, "feature-dist", cmd_eval_feature_dist, "mean correlation distance of feature rows")
    p.opt("--orig", metavar="PATH", required=True)
    p.opt("--recon", metavar="PATH", required=True)
    p.opt("--csv", metavar="PATH")
    _format_opt(p)
    p = _leaf(ev, "pixcomp", cmd_eval_pixcomp, "pairwise decoding accuracy in pixel space")
    p.opt("--orig-dir", metavar="DIR", required=True)
    p.opt("--recon-dir", metavar="DIR", required=True)
    p.opt("--csv", metavar="PATH")

    pca = sub.add_parser("pca", help="eigen-image codec").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = _leaf(pca, "fit", cmd_pca_fit, "fit principal components on an image directory")
    p.opt("--images", metavar="DIR", required=True)
    p.opt("--k", type=int, default=eigenimage.DEFAULT_K)
    p.opt("--out", metavar="PREFIX", required=True)
    p = _leaf(pca, "transform", cmd_pca_transform, "project images to coefficients")
    p.opt("--model", metavar="PREFIX", required=True)
    p.opt("--images", metavar="DIR", required=True)
    p.opt("--out", metavar="PATH", required=True)
    _format_opt(p)
    p = _leaf(pca, "reconstruct", cmd_pca_reconstruct, "render coefficients back to images")
    p.opt("--model", metavar="PREFIX", required=True)
    p.opt("--coeffs", metavar="PATH", required=True)
    p.opt("--out-dir", metavar="DIR", required=True)
    _format_opt(p)

    r = sub.add_parser("roi", help="region-of-interest tools").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = _leaf(r, "select", cmd_roi_select, "keep only the voxels of a mask")
    p.opt("--responses", metavar="PATH", required=True)
    p.opt("--mask", metavar="PATH", required=True)
    p.opt("--out", metavar="PATH", required=True)
    _format_opt(p)
    p = _leaf(r, "union", cmd_roi_union, "merge masks into one")
    p.opt("--masks", metavar="P1,P2,...", required=True)
    p.opt("--name", required=True)
    p.opt("--out", metavar="PATH", required=True)

    s = sub.add_parser("synth", help="synthetic ground-truth data").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, func, text in (("generate", cmd_synth_generate, "write a synthetic dataset"),
                             ("sweep", cmd_synth_sweep, "accuracy versus noise level")):
        p = _leaf(s, name, func, text)
        p.opt("--n-train", type=int)
        p.opt("--n-test", type=int)
        p.opt("--latent-dim", type=int)
        p.opt("--n-voxels", type=int)
        p.opt("--noise-sigma", type=float)
        p.opt("--seed", type=int)
        p.opt("--n-groups", type=int)
        if name == "generate":
            p.opt("--out-dir", metavar="DIR", required=True)
        else:
            p.opt("--sigmas", metavar="LIST", required=True, help="comma-separated noise levels")
            p.opt("--reps", type=int, default=10)
            p.opt("--out", metavar="CSV", required=True)

    p = _leaf(sub, "report", cmd_report, "assemble per-region accuracy reports")
    p.opt("--pairs", metavar="NAME=FILE,...", required=True)
    p.opt("--out", metavar="CSV", required=True)
    p.opt("--sort", choices=("input", "accuracy"), default="input",
          help="row order: as given, or by decreasing accuracy")
    return parser


def _thread_limit():
    raw = os.environ.get("LATENT_DECODE_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigInvalid(f"LATENT_DECODE_THREADS must be a positive integer, got {raw!r}")
    return n


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args.leaf, args)
        limit = _thread_limit()
        with warnings.catch_warnings():
            warnings.simplefilter("always", DecodeWarning)
            warnings.showwarning = _show_warning
            if limit is None:
                args.func(args)
            else:
                from threadpoolctl import threadpool_limits
                with threadpool_limits(limits=limit):
                    args.func(args)
    except LatentDecodeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
