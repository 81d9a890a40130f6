"""Command-line entry point.

Subcommands cover the whole workflow: generate graphs and datasets, estimate
a connectivity graph from a time-series panel, train the autoencoder, embed a
dataset through a checkpoint, compare all dimensionality-reduction methods,
run the graph / activation ablations, and merge reports.

Exit codes: 0 success, 1 usage error, 2 input-file error, 3 numerical failure
(partial results are left on disk).  All configuration comes from long-form
flags; environment variables are never consulted.
"""

import argparse
import json
import sys

import numpy as np

from . import connectivity, data, graph, model, pipeline, report
from ._version import __version__
from .exceptions import (
    GcaeError,
    MalformedFileError,
    NoConvergenceError,
    NonfiniteLossError,
)

__all__ = ["main", "run_command"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}") from exc


def _build_parser():
    parser = _Parser(prog="gcae", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gcae {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a random or block-structured graph CSV")
    p.add_argument("--kind", choices=("random", "block"), default="random")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.15)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.3)
    p.add_argument("--p-out", type=float, default=0.03)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_graph)

    p = sub.add_parser("gen-data", help="generate a labeled synthetic dataset CSV")
    p.add_argument("--n", type=int, help="graph size when generating the ground-truth graph")
    p.add_argument("--graph", help="existing adjacency CSV to generate on")
    p.add_argument("--graph-density", type=float, default=0.15)
    p.add_argument("--per-class", type=int, default=250)
    p.add_argument("--smooth-band", type=int, default=8)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--spike-prob", type=float, default=0.05)
    p.add_argument("--spike-scale", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--save-graph", help="also write the generating graph's adjacency CSV")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("estimate-graph", help="estimate a graph from a panel CSV")
    p.add_argument("--panel", required=True)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.add_argument("--influence-out", help="also write the directed influence matrix CSV")
    p.set_defaults(func=_cmd_estimate_graph)

    p = sub.add_parser("train", help="train the autoencoder and write a checkpoint")
    p.add_argument("--dataset", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channels", type=_int_list, default=(16, 5),
                   help="graph-conv channels; empty string for none")
    p.add_argument("--dense-dims", type=_int_list, default=(256, 50, 256),
                   help="hidden dense widths; the reconstruction layer is appended")
    p.add_argument("--epochs", type=int, default=80)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--l2", type=float, default=5e-4)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--conv-activation", choices=("relu", "identity"), default="relu")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report-out", help="write the training report as JSON")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("embed", help="embed a dataset through a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed)

    for name, helptext in (
        ("compare", "evaluate all dimensionality-reduction methods on one dataset"),
        ("ablate", "graph or activation ablation of the autoencoder"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--dataset", required=True)
        p.add_argument("--graph", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
        if name == "compare":
            p.add_argument("--methods", default=",".join(pipeline.DEFAULT_METHODS))
        else:
            p.add_argument("--which", choices=("graph", "activation"), required=True)
        p.add_argument("--bottleneck", type=int, default=50)
        p.add_argument("--hidden", type=int, default=256)
        p.add_argument("--channels", type=_int_list, default=(16, 5))
        p.add_argument("--epochs", type=int, default=80)
        p.add_argument("--dropout", type=float, default=0.2)
        p.add_argument("--l2", type=float, default=5e-4)
        p.add_argument("--lr", type=float, default=0.001)
        p.add_argument("--batch-size", type=int, default=32)
        p.add_argument("--svm-c", type=float, default=1.0)
        p.add_argument("--svm-epochs", type=int, default=100)
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--no-standardize", action="store_true",
                       help="skip per-fold embedding standardization")
        p.add_argument("--gbf-laplacian", choices=("normalized", "combinatorial"),
                       default="normalized")
        p.add_argument("--rpca-tol", type=float, default=1e-6)
        p.add_argument("--rpca-max-iter", type=int, default=300)
        p.set_defaults(func=_cmd_compare if name == "compare" else _cmd_ablate)

    p = sub.add_parser("report", help="merge prior report JSON files into one document")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


# --- subcommand bodies ---

def _cmd_gen_graph(args):
    if args.kind == "random":
        g = graph.random_connected_graph(args.n, density=args.density, seed=args.seed)
    else:
        g = graph.stochastic_block_graph(
            args.n, n_blocks=args.blocks, p_in=args.p_in, p_out=args.p_out, seed=args.seed
        )
    graph.save_adjacency(args.out, g)
    print(f"wrote {args.kind} graph: n={g.n}, edges={int((g.adjacency > 0).sum() // 2)} -> {args.out}")
    return 0


def _cmd_gen_data(args):
    if args.graph:
        g = graph.load_adjacency(args.graph)
    elif args.n:
        g = graph.random_connected_graph(
            args.n, density=args.graph_density,
            seed=args.seed + pipeline.SEED_OFFSETS["graph"],
        )
    else:
        raise _UsageError("gen-data needs --n or --graph")
    noise = data.NoiseSpec(
        gaussian_sigma=args.sigma, spike_prob=args.spike_prob, spike_scale=args.spike_scale
    )
    dataset = data.generate_dataset(
        g, args.per_class, smooth_band=args.smooth_band, noise=noise, seed=args.seed
    )
    data.save_dataset(args.out, dataset)
    if args.save_graph:
        graph.save_adjacency(args.save_graph, g)
    print(f"wrote dataset: {dataset.n_samples} samples x {dataset.n_vertices} vertices -> {args.out}")
    return 0


def _cmd_estimate_graph(args):
    panel = connectivity.load_panel(args.panel)
    influence = connectivity.granger_influence(panel, order=args.order)
    g = connectivity.influence_to_graph(influence, density=args.density)
    graph.save_adjacency(args.out, g)
    if args.influence_out:
        with open(args.influence_out, "w", encoding="utf-8") as fh:
            for row in influence:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"estimated graph on {g.n} channels -> {args.out}")
    return 0


def _load_inputs(args):
    dataset = data.load_dataset(args.dataset)
    g = graph.load_adjacency(args.graph)
    if g.n != dataset.n_vertices:
        raise MalformedFileError(
            f"graph size {g.n} does not match dataset dimension {dataset.n_vertices}"
        )
    return dataset, g


def _cmd_train(args):
    dataset, g = _load_inputs(args)
    config = model.GcaeConfig(
        graph_conv_channels=args.channels,
        dense_dims=tuple(args.dense_dims) + (dataset.n_vertices,),
        dropout_rate=args.dropout,
        l2_lambda=args.l2,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed + pipeline.SEED_OFFSETS["model"],
        conv_activation=args.conv_activation,
    )
    if args.channels:
        a_tilde = graph.renormalized_adjacency(g)
    else:
        a_tilde = np.eye(dataset.n_vertices)
    net = model.build_model(config, a_tilde)
    train_report = model.train(net, dataset)
    model.save_checkpoint(net, args.out)
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "format": "gcae-train-report-v1",
                    "seed": train_report.seed,
                    "epoch_losses": train_report.epoch_losses,
                    "final_loss": train_report.final_loss,
                },
                fh,
                indent=1,
            )
            fh.write("\n")
    final = "n/a" if train_report.final_loss is None else f"{train_report.final_loss:.6f}"
    print(f"trained {args.epochs} epochs, final loss {final} -> {args.out}")
    return 0


def _cmd_embed(args):
    net = model.load_checkpoint(args.checkpoint)
    dataset = data.load_dataset(args.dataset)
    embeddings = model.embed_batch(net, dataset.features)
    header = ",".join([f"emb_{i}" for i in range(embeddings.shape[1])] + ["label"])
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row, label in zip(embeddings, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")
    print(f"wrote {embeddings.shape[0]} x {embeddings.shape[1]} embeddings -> {args.out}")
    return 0


def _settings_from_args(args, methods=None) -> pipeline.ExperimentSettings:
    return pipeline.ExperimentSettings(
        methods=tuple(methods) if methods is not None else pipeline.DEFAULT_METHODS,
        bottleneck=args.bottleneck,
        hidden=args.hidden,
        channels=args.channels,
        epochs=args.epochs,
        dropout_rate=args.dropout,
        l2_lambda=args.l2,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        svm_c=args.svm_c,
        svm_epochs=args.svm_epochs,
        folds=args.folds,
        standardize=not args.no_standardize,
        gbf_laplacian=args.gbf_laplacian,
        rpca_tol=args.rpca_tol,
        rpca_max_iter=args.rpca_max_iter,
    )


def _finish_report(args, result):
    result.config["dataset_path"] = args.dataset
    result.config["graph_path"] = args.graph
    report.write_report(args.out, result)
    print(report.render_table(result))
    print(f"report -> {args.out}")
    return 0


def _cmd_compare(args):
    requested = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = sorted(set(requested) - set(pipeline.DEFAULT_METHODS))
    if unknown:
        raise _UsageError(f"unknown methods: {', '.join(unknown)}")
    if not requested:
        raise _UsageError("at least one method is required")
    dataset, g = _load_inputs(args)
    settings = _settings_from_args(args, methods=requested)
    return _finish_report(args, pipeline.compare_methods(dataset, g, settings, args.seed))


def _cmd_ablate(args):
    dataset, g = _load_inputs(args)
    settings = _settings_from_args(args)
    if args.which == "graph":
        result = pipeline.ablate_graph_choice(dataset, g, settings, args.seed)
    else:
        result = pipeline.ablate_activation(dataset, g, settings, args.seed)
    return _finish_report(args, result)


def _cmd_report(args):
    docs = [report.read_report(path) for path in args.inputs]
    merged = report.merge_documents(docs)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(merged, fh, indent=1)
        fh.write("\n")
    print(f"merged {len(docs)} report(s) -> {args.out}")
    return 0


def run_command(argv) -> int:
    """Parse and execute one invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version paths
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NoConvergenceError, NonfiniteLossError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (MalformedFileError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except GcaeError as exc:
        # remaining domain errors at the CLI boundary stem from file contents
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
