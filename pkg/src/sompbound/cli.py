"""Command line entry point: ``sompbound <subcommand> [options]``.

Subcommands ``case1`` .. ``case4`` and ``soundness`` exit with status 0 only
when no bound ever exceeded the exact metric and every case verdict held.
Options may also come from ``--config FILE`` holding ``key=value`` lines
(keys as in :class:`~sompbound.experiments.ExperimentSpec`); explicit flags
win over the file.
"""
import argparse
import logging
import os
import sys

from .experiments import (
    DELTA_EXACT,
    DELTA_SUPPORT,
    FIGURE1_DELTAS,
    FIGURE1_JT,
    Experiment,
    ExperimentSpec,
    figure1_grid,
    run_case,
    soundness_campaign,
    summary_text,
    write_figure1_outputs,
)
from .linalg import read_matrix
from .model import gen_matrix_gaussian, read_key_values
from .rip import ric_exact, write_ric_csv

log = logging.getLogger("sompbound")

_CASE_DEFAULTS = {
    "case4": {"m": 64, "n": 64},
}


def _int_list(text):
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)


def _float_list(text):
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def build_parser():
    parser = argparse.ArgumentParser(prog="sompbound", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file with default settings")
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--K", type=_int_list, help="comma separated list, e.g. 1,4,16")
        p.add_argument("--s", type=int, help="support size and number of SOMP iterations")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--delta-grid", type=_float_list, dest="delta_grid",
                       help="hypothetical delta values instead of the computed constant")
        p.add_argument("--delta-source", choices=[DELTA_SUPPORT, DELTA_EXACT], dest="delta_source")
        p.add_argument("--out", dest="output_dir", help="output directory for CSV files")
        p.add_argument("--save-instances", action="store_true", default=None, dest="save_instances")

    for name in ("case1", "case2", "case3", "case4"):
        common(sub.add_parser(name, help=f"comparison scenario {name[-1]}"))
    p = sub.add_parser("soundness", help="randomized soundness campaign")
    common(p)
    p.add_argument("--matrix", choices=["gaussian", "orthonormal"])

    p = sub.add_parser("figure1", help="tabulate the identical-magnitude ratio")
    p.add_argument("--k-max", type=int, default=64, dest="k_max")
    p.add_argument("--jt-sizes", type=_int_list, default=FIGURE1_JT, dest="jt_sizes")
    p.add_argument("--delta-grid", type=_float_list, default=FIGURE1_DELTAS, dest="delta_grid")
    p.add_argument("--out", dest="output_dir", default="figure1_out")

    p = sub.add_parser("ric", help="exact restricted isometry constants")
    p.add_argument("--matrix-file", help="matrix in 'rows cols' text format; default: Gaussian draw")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--s", type=int, default=3, help="largest order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="output_dir", help="write ric.csv here instead of stdout")
    return parser


_SPEC_KEYS = {
    "m": int, "n": int, "K": _int_list, "s": int, "trials": int, "seed": int,
    "delta_grid": _float_list, "delta_source": str, "output_dir": str, "out": str,
    "matrix": str, "factor": float, "mu": float,
    "save_instances": lambda v: str(v).lower() in ("1", "true", "yes"),
}


def _spec_from_args(args):
    settings = dict(_CASE_DEFAULTS.get(args.command, {}))
    if args.config:
        for key, raw in read_key_values(args.config).items():
            key = key.replace("-", "_")
            if key not in _SPEC_KEYS:
                raise SystemExit(f"{args.config}: unknown key {key!r}")
            settings["output_dir" if key == "out" else key] = _SPEC_KEYS[key](raw)
    for key in ("m", "n", "K", "s", "trials", "seed", "delta_grid", "delta_source",
                "output_dir", "save_instances", "matrix"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    grid = settings.pop("delta_grid", None)
    if grid:
        settings["delta_source"] = grid
    return ExperimentSpec(experiment=Experiment(args.command), **settings)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "figure1":
        result = figure1_grid(range(1, args.k_max + 1), args.jt_sizes, args.delta_grid)
        write_figure1_outputs(result, args.output_dir)
        for (jt, delta), k in sorted(result.crossing.items()):
            print(f"|J_t|={jt} delta={delta:g}: r >= 1 from K={k} "
                  f"(closed form {result.crossing_closed_form[(jt, delta)]})")
        return 0

    if args.command == "ric":
        phi = read_matrix(args.matrix_file) if args.matrix_file else gen_matrix_gaussian(args.m, args.n, args.seed)
        table = ric_exact(phi, args.s)
        if args.output_dir:
            os.makedirs(args.output_dir, exist_ok=True)
            with open(os.path.join(args.output_dir, "ric.csv"), "w", encoding="ascii") as fh:
                write_ric_csv(table, fh)
        else:
            write_ric_csv(table, sys.stdout)
        return 0

    spec = _spec_from_args(args)
    log.info("running %s", spec)
    if spec.experiment is Experiment.SOUNDNESS:
        result = soundness_campaign(spec)
    else:
        result = run_case(spec)
    sys.stdout.write(summary_text(result.summary))
    return 0 if result.summary.passed else 1


if __name__ == "__main__":
    sys.exit(main())
