import logging
from pathlib import Path
from typing import List

from lexicalmodularity.alignment.matrix import map_space
from lexicalmodularity.config.settings import RunConfig
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, merge_spaces, preprocess
from lexicalmodularity.graph.ann_index import build_forest
from lexicalmodularity.graph.lexical_graph import build_graph, export_edges
from lexicalmodularity.graph.modularity import modularity
from lexicalmodularity.operations.inputs import load_initial_mapping, load_space, log_config, print_table, require_out
from lexicalmodularity.utils.constants import PreprocessStep, Symmetrization
from lexicalmodularity.utils.errors import InvalidParameterError
from lexicalmodularity.utils.helpers import write_json

logger = logging.getLogger(__name__)


def _joint_space(config: RunConfig) -> EmbeddingSpace:
    """
    All --emb languages, plus the --src space mapped by --mapping and the
    --tgt space when a pair is given.
    """
    spaces: List[EmbeddingSpace] = [load_space(config, language, path) for language, path in config.embeddings]
    if config.source is not None or config.target is not None:
        if config.source is None or config.target is None:
            raise InvalidParameterError("--src and --tgt must be given together")
        source = load_space(config, *config.source)
        mapping = load_initial_mapping(config, source.dim)
        spaces.append(map_space(source, mapping))
        spaces.append(preprocess(load_space(config, *config.target), [PreprocessStep.UNIT]))
    elif config.mapping is not None:
        raise InvalidParameterError("--mapping needs --src and --tgt")
    if not spaces:
        raise InvalidParameterError("'modularity' needs --emb LANG=PATH (repeatable) or --src/--tgt")
    return merge_spaces(spaces)


def cmd_modularity(config: RunConfig) -> Path:
    """
    Normalized modularity of the joint lexical graph of every given language,
    written as a JSON report that embeds the run config.
    """
    out = require_out(config)
    log_config(config)
    joint = _joint_space(config)
    if config.limit is not None:
        joint = joint.top_frequent(config.limit)
    logger.info(f"Joint space: {len(joint)} words in {len(joint.language_codes)} language(s)")

    forest = None
    if config.use_forest:
        forest = build_forest(
            joint, trees=config.trees, leaf_capacity=config.leaf_capacity, seed=config.seed, threads=config.threads
        )
    graph = build_graph(
        joint, k=config.k, forest=forest, symmetrization=Symmetrization(config.symmetrize), threads=config.threads
    )
    if config.edges:
        export_edges(graph, config.edges)
        logger.info(f"Edge list written to {config.edges}")
    report = modularity(graph)

    record = report.to_record()
    record["config"] = config.to_record()
    path = write_json(out, record)
    print_table(
        [(language, share.a_l, share.e_ll) for language, share in sorted(report.per_language.items())],
        ["Language", "a_l", "e_ll"],
    )
    print_table([(report.q, report.q_max, report.q_norm, report.n_nodes, report.n_edges)], ["Q", "Q_max", "Q_norm", "Nodes", "Edges"])
    return path
