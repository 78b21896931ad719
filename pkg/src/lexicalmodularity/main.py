import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from lexicalmodularity.config.settings import (
    RunConfig,
    default_threads,
    load_environment,
    parse_language_path,
    parse_preprocess,
)
from lexicalmodularity.operations.alignment import cmd_fit, cmd_refine, cmd_select
from lexicalmodularity.operations.modularity_report import cmd_modularity
from lexicalmodularity.operations.retrieval import cmd_bli, cmd_expand
from lexicalmodularity.operations.statistics import cmd_ablate, cmd_correlate, cmd_sweep
from lexicalmodularity.utils.constants import (
    DEFAULT_DICTIONARY_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_K,
    DEFAULT_KAPPA,
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_LIMIT,
    DEFAULT_SEED,
    DEFAULT_TREES,
    ExitCode,
    KnnBackend,
    MappingMethod,
    Message,
    Retrieval,
    Symmetrization,
)
from lexicalmodularity.utils.errors import InputError, SweepCellError, UndefinedMetricError
from lexicalmodularity.utils.logging_utils import setup_logging

logger = logging.getLogger(__name__)

COMMANDS: Dict[str, Callable[[RunConfig], object]] = {
    "modularity": cmd_modularity,
    "bli": cmd_bli,
    "expand": cmd_expand,
    "fit": cmd_fit,
    "refine": cmd_refine,
    "select": cmd_select,
    "correlate": cmd_correlate,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
}

HELP = {
    "modularity": "Normalized modularity of the joint lexical graph (JSON report)",
    "bli": "Bilingual lexicon induction precision@1 (TSV + summary JSON)",
    "expand": "Nearest cross-lingual neighbours of seed words (TSV)",
    "fit": "Fit a mapping on a seed lexicon (mapping file)",
    "refine": "Procrustes refinement with a validation metric (mapping + trace)",
    "select": "Pick the best of several mapping files by a validation metric (TSV)",
    "correlate": "Pearson and Spearman correlation of feature columns with a target (TSV)",
    "ablate": "Standardized regression ablation over feature columns (TSV)",
    "sweep": "Grid search of modularity correlation over k and tree counts (TSV)",
}


def _int_list(value: str) -> List[int]:
    try:
        return [int(token) for token in value.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    inputs = parent.add_argument_group("inputs")
    inputs.add_argument("--emb", action="append", default=[], type=parse_language_path, metavar="LANG=PATH",
                        help="Embedding file of one language (repeatable)")
    inputs.add_argument("--src", type=parse_language_path, metavar="LANG=PATH", help="Source embedding file")
    inputs.add_argument("--tgt", type=parse_language_path, metavar="LANG=PATH", help="Target embedding file")
    inputs.add_argument("--lexicon", help="Bilingual lexicon (test pairs, or seed pairs for fit/refine)")
    inputs.add_argument("--exclude", help="Lexicon whose pairs are removed from the test lexicon")
    inputs.add_argument("--mapping", help="Mapping file applied to the source space")
    inputs.add_argument("--candidate", action="append", default=[], dest="mappings",
                        help="Candidate mapping file for 'select' (repeatable)")
    inputs.add_argument("--table", help="Feature table or sweep manifest (TSV with header)")
    inputs.add_argument("--target", dest="target_column", default=None, help="Target column of --table")
    inputs.add_argument("--seeds", help="Seed words for 'expand', one per line (default: disaster-domain list)")
    inputs.add_argument("--lowercase", action="store_true", help="Lowercase words on load")
    inputs.add_argument("--max-vocab", type=int, default=None, help="Read at most this many words per file")
    inputs.add_argument("--preprocess", type=parse_preprocess, default=None, metavar="STEPS",
                        help="Comma-separated chain of unit/center, or 'none' (default: unit,center,unit)")

    graph = parent.add_argument_group("graph and search")
    graph.add_argument("--k", type=int, default=DEFAULT_K, help=f"Neighbours per node (default: {DEFAULT_K})")
    graph.add_argument("--k-values", type=_int_list, default=[], help="Comma-separated k grid for 'sweep'")
    graph.add_argument("--trees", type=int, default=DEFAULT_TREES, help=f"Random projection trees (default: {DEFAULT_TREES})")
    graph.add_argument("--trees-values", type=_int_list, default=[], help="Comma-separated tree-count grid for 'sweep'")
    graph.add_argument("--leaf-capacity", type=int, default=DEFAULT_LEAF_CAPACITY)
    graph.add_argument("--knn", choices=[b.value for b in KnnBackend], default=KnnBackend.FOREST.value)
    graph.add_argument("--symmetrize", choices=[s.value for s in Symmetrization], default=Symmetrization.UNION.value)
    graph.add_argument("--limit", type=int, default=DEFAULT_LIMIT,
                       help=f"Most frequent words per language (default: {DEFAULT_LIMIT})")
    graph.add_argument("--edges", help="Also write the graph's edge list to this TSV ('modularity')")

    alignment = parent.add_argument_group("alignment and retrieval")
    alignment.add_argument("--metric", help="Validation metric: csls10k or mod10k")
    alignment.add_argument("--method", choices=[m.value for m in MappingMethod], default=MappingMethod.PROCRUSTES.value)
    alignment.add_argument("--retrieval", choices=[r.value for r in Retrieval], default=Retrieval.CSLS.value)
    alignment.add_argument("--kappa", type=int, default=DEFAULT_KAPPA, help=f"CSLS neighbourhood size (default: {DEFAULT_KAPPA})")
    alignment.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    alignment.add_argument("--dictionary-size", type=int, default=DEFAULT_DICTIONARY_SIZE)
    alignment.add_argument("--no-mutual", dest="mutual", action="store_false",
                           help="Keep induced pairs that are not mutual nearest neighbours")
    alignment.add_argument("--neighbors", type=int, default=10, help="Targets per seed word for 'expand'")

    run = parent.add_argument_group("run")
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--threads", type=int, default=None, help="Worker threads (default: LEXMOD_THREADS or CPU count)")
    run.add_argument("--out", help="Output file")
    run.add_argument("--log-level", default=None, help="Console log level (default: LEXMOD_LOG_LEVEL or INFO)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexicalmodularity",
        description="Language clustering of cross-lingual word embeddings, measured by graph modularity.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")
    parent = _common_options()
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[parent], help=HELP[name], description=HELP[name])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Turn parsed arguments into a validated RunConfig."""
    options = dict(
        subcommand=args.subcommand,
        embeddings=list(args.emb),
        source=args.src,
        target=args.tgt,
        lexicon=args.lexicon,
        exclude=args.exclude,
        mapping=args.mapping,
        mappings=list(args.mappings),
        table=args.table,
        target_column=args.target_column,
        seeds=args.seeds,
        metric=args.metric,
        method=args.method,
        retrieval=args.retrieval,
        k=args.k,
        k_values=list(args.k_values),
        trees=args.trees,
        trees_values=list(args.trees_values),
        leaf_capacity=args.leaf_capacity,
        knn=args.knn,
        symmetrize=args.symmetrize,
        kappa=args.kappa,
        limit=args.limit,
        epochs=args.epochs,
        dictionary_size=args.dictionary_size,
        mutual=args.mutual,
        neighbors=args.neighbors,
        seed=args.seed,
        threads=args.threads if args.threads is not None else default_threads(),
        lowercase=args.lowercase,
        max_vocab=args.max_vocab,
        out=args.out,
        edges=args.edges,
    )
    if args.preprocess is not None:
        options["preprocess"] = args.preprocess
    return RunConfig(**options).validate()


def _exit_code_for(error: BaseException) -> ExitCode:
    if isinstance(error, SweepCellError):
        return _exit_code_for(error.cause)
    if isinstance(error, (InputError, OSError, UnicodeDecodeError)):
        return ExitCode.INPUT_ERROR
    if isinstance(error, UndefinedMetricError):
        return ExitCode.UNDEFINED_METRIC
    return ExitCode.UNEXPECTED


def run(args: argparse.Namespace) -> ExitCode:
    """Execute one parsed command line and map its outcome to an exit code."""
    try:
        config = config_from_args(args)
        path = COMMANDS[config.subcommand](config)
        logger.info(Message.WROTE.value.format(path))
        return ExitCode.SUCCESS
    except KeyboardInterrupt:
        logger.info(Message.INTERRUPTED.value)
        return ExitCode.INTERRUPTED
    except Exception as e:
        code = _exit_code_for(e)
        if code is ExitCode.INPUT_ERROR:
            logger.error(Message.INPUT_ERROR.value.format(e))
        elif code is ExitCode.UNDEFINED_METRIC:
            logger.error(Message.UNDEFINED_METRIC.value.format(e))
        else:
            logger.exception(Message.UNEXPECTED.value.format(e))
        return code


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the `lexicalmodularity` command.
    Args:
        argv: Command-line arguments without the program name (default: sys.argv[1:]).
    Returns:
        int: Process exit code (0 success, 2 input error, 3 undefined metric).
    """
    load_environment()
    args = build_parser().parse_args(argv)
    setup_logging(console_level=args.log_level)
    return run(args).value


if __name__ == "__main__":
    sys.exit(main())
