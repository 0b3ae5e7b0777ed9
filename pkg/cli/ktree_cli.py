#!/usr/bin/env python3
"""
ktree CLI - ingestion, tree builds, search, evaluation and benchmarking.

Every command reads its parameters from a RunConfig (defaults, optional
--config file, environment, flags). Exit status: 0 on success, 1 on runtime
or per-query failures, 2 on invalid configuration or input.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from baselines.brute_force import brute_force_pairwise, brute_force_topn
from baselines.kdtree import kdtree_build, kdtree_topn
from evalx.harness import evaluate, report_row, REPORT_COLUMNS, write_report_json, write_report_tsv
from evalx.models import EvalReport, QRels
from evalx.storage import load_qrels
from ingest.corpus import build_corpus, save_corpus
from ingest.pairs import parse_pairs
from kmeans.models import KMeansConfig
from ktree.builder import build_tree, shared_depth
from ktree.models import KTree
from ktree.serializers import deserialize_tree, serialize_tree
from ktree.stats import tree_stats
from ktree_search.exceptions import (
    ConfigurationError,
    DomainError,
    InvalidInputError,
    KTreeError,
    UnsupportedMetricError,
)
from scorers.base import PairScorer
from scorers.lexical import LexicalScorer
from scorers.remote import RemoteScorer
from search.beam import batch_search
from search.models import EXHAUSTIVE_BEAM, SearchParams, SearchQuery, SearchResult
from vecstore.models import EmbeddingSet
from vecstore.ops import cosine_mse_loss, normalize
from vecstore.storage import load_embeddings, load_items, load_pairs
from .config import RunConfig, configure_logging, parse_beam_width, require_files, resolve_config

logger = logging.getLogger(__name__)

console = Console()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

METHODS = (
    "tree",
    "tree-pairwise",
    "compute-all-cosine",
    "compute-all-euclidean",
    "kdtree",
    "compute-all-pairwise",
)
PAIRWISE_METHODS = ("tree-pairwise", "compute-all-pairwise")
_VALIDATION_ERRORS = (ConfigurationError, InvalidInputError, DomainError, UnsupportedMetricError)


class KTreeCLI:
    """Command implementations; each ``cmd_*`` returns an exit status."""

    def __init__(self, config: Optional[RunConfig] = None):
        """Initialize CLI."""
        self.config = config or RunConfig.defaults()
        self._open_scorers: List[RemoteScorer] = []

    # Loading helpers

    def load_corpus(self, embeddings_path, items_path=None) -> EmbeddingSet:
        """Load embeddings (and item texts), normalizing unless disabled."""
        require_files(embeddings=embeddings_path, items=items_path)
        items = load_items(items_path) if items_path else None
        embeddings = load_embeddings(embeddings_path, items)
        if self.config.normalize:
            embeddings = normalize(embeddings)
        return embeddings

    def load_tree(self, tree_path, embeddings: EmbeddingSet) -> KTree:
        require_files(tree=tree_path)
        return deserialize_tree(tree_path).with_embeddings(embeddings)

    def make_scorer(self, local: bool = False) -> PairScorer:
        """The lexical scorer when ``local``, else the HTTP client for the configured endpoint."""
        if local:
            return LexicalScorer()
        if not self.config.scorer_url:
            raise ConfigurationError("pairwise mode needs --scorer-url (or KTREE_SCORER_URL) or --local-scorer")
        scorer = RemoteScorer(self.config.scorer_config())
        self._open_scorers.append(scorer)
        return scorer

    def close(self) -> None:
        """Close HTTP clients opened for pair scoring."""
        while self._open_scorers:
            self._open_scorers.pop().close()

    def search_params(self, beam_width=None, exclude_ids=()) -> SearchParams:
        return SearchParams(
            beam_width=self.config.beam_width if beam_width is None else beam_width,
            top_n=self.config.top_n,
            metric=self.config.metric,
            exclude_ids=frozenset(exclude_ids),
        )

    def build(
        self, embeddings: EmbeddingSet, branching: Optional[int] = None, max_depth: Optional[int] = None
    ) -> KTree:
        config = self.config
        branching = branching or config.branching
        return build_tree(
            embeddings,
            branching=branching,
            leaf_capacity=config.leaf_capacity,
            kmeans_config=KMeansConfig(
                k=branching, max_iter=config.max_iter, tol=config.tol, seed=config.seed, init=config.init
            ),
            rep_count=config.rep_count,
            max_depth=max_depth or config.max_depth,
            threads=config.threads,
        )

    # Commands

    def cmd_ingest(self, args) -> int:
        """Parse a question-pair TSV and write the corpus files."""
        require_files(input=args.input)
        parsed = parse_pairs(args.input)
        corpus = build_corpus(parsed.pairs)
        paths = save_corpus(corpus, args.out_dir)
        print(f"Pairs parsed: {len(parsed)} (dropped {parsed.dropped})")
        print(f"Unique questions: {corpus.items.count}")
        print(f"Queries with relevant items: {len(corpus.qrels)}")
        print(f"Self-pairs excluded: {corpus.self_pairs_excluded}")
        for name, path in paths.items():
            print(f"Wrote {name}: {path}")
        return EXIT_OK

    def cmd_build(self, args) -> int:
        """Build a tree over an embedding file and write it."""
        embeddings = self.load_corpus(args.embeddings, args.items)
        tree = self.build(embeddings)
        serialize_tree(tree, args.out)
        stats = tree_stats(tree)

        table = Table(title=f"Tree over {tree.item_count} items (branching {tree.branching})")
        table.add_column("statistic")
        table.add_column("value", justify="right")
        for key, value in stats.as_dict().items():
            table.add_row(key, str(value))
        console.print(table)
        if args.stats_json:
            Path(args.stats_json).write_text(json.dumps(stats.as_dict(), indent=2) + "\n", encoding="utf-8")
        print(f"Tree written to {args.out}")
        return EXIT_OK

    def cmd_search(self, args) -> int:
        """Search the tree for one or more queries."""
        mode = self.config.mode
        if mode == "pairwise" and not (args.items and (args.local_scorer or self.config.scorer_url)):
            raise ConfigurationError("pairwise search needs --items and a scorer (--scorer-url or --local-scorer)")
        if not args.query_id and not args.query_text:
            raise ConfigurationError("give at least one --query-id or --query-text")
        if args.query_text and mode != "pairwise":
            raise ConfigurationError("--query-text needs --mode pairwise")
        embeddings = self.load_corpus(args.embeddings, args.items)
        tree = self.load_tree(args.tree, embeddings)
        qrels = load_qrels(args.qrels, embeddings.items) if args.qrels else None
        scorer = self.make_scorer(args.local_scorer) if mode == "pairwise" else None

        queries = []
        for query_id in args.query_id or []:
            if not 0 <= query_id < embeddings.count:
                raise InvalidInputError(f"query id {query_id} is outside the corpus of {embeddings.count} items")
            queries.append(
                SearchQuery(
                    key=query_id,
                    vector=embeddings.vectors[query_id],
                    text=embeddings.items.text(query_id),
                    exclude_ids=frozenset({query_id}),
                )
            )
        queries.extend(SearchQuery(key=f"text:{i}", text=text) for i, text in enumerate(args.query_text or []))

        params = self.search_params()
        batch = batch_search(
            tree, queries, params, mode=mode, scorer=scorer, items=embeddings.items, threads=self.config.threads
        )
        self._write_search_output(batch.results, args.format, args.output)
        if args.compare:
            for query in queries:
                if query.key in batch.results:
                    self._print_comparison(query, batch.results[query.key], embeddings, scorer, qrels)
        return self._report_failures(batch.errors)

    def cmd_eval(self, args) -> int:
        """Run every method over all qrels queries and write the report."""
        methods = args.method or ["tree"]
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ConfigurationError(f"unknown method(s) {unknown}, expected {METHODS}")
        needs_items = any(m in PAIRWISE_METHODS for m in methods)
        if needs_items and not args.items:
            raise ConfigurationError("pairwise methods need --items")
        if any(m.startswith("tree") for m in methods) and not args.tree:
            raise ConfigurationError("tree methods need --tree")
        require_files(qrels=args.qrels, pairs=args.pairs)

        embeddings = self.load_corpus(args.embeddings, args.items)
        qrels = load_qrels(args.qrels, embeddings.items)
        tree = self.load_tree(args.tree, embeddings) if args.tree else None
        scorer = self.make_scorer(args.local_scorer) if needs_items else None

        rows: List[Tuple[str, EvalReport]] = []
        failed = {}
        for method in methods:
            name, report = self.run_method(method, embeddings, qrels, tree, scorer)
            rows.append((name, report))
            failed.update(report.errors)

        write_report_tsv(rows, args.report, timestamp=args.timestamp)
        if args.json_out:
            write_report_json(rows, args.json_out)
        self._print_report(rows)
        if args.pairs:
            pairs = load_pairs(args.pairs, embeddings.items)
            print(f"Cosine MSE over {len(pairs)} labeled pairs: {cosine_mse_loss(embeddings, pairs):.6f}")
        print(f"Report written to {args.report}")
        return self._report_failures(failed)

    def cmd_bench(self, args) -> int:
        """Sweep branching x beam width and write the accuracy versus eval-count frontier."""
        branchings = parse_int_list(args.branchings, "branchings", minimum=2)
        beam_widths = parse_beam_list(args.beam_widths)
        require_files(qrels=args.qrels)
        embeddings = self.load_corpus(args.embeddings, args.items)
        qrels = load_qrels(args.qrels, embeddings.items)

        rows: List[Tuple[str, EvalReport]] = []
        if args.reference:
            rows.append(self.run_method(f"compute-all-{self.config.metric}", embeddings, qrels))
        # Every tree in the sweep gets the same number of levels.
        depth = self.config.max_depth or shared_depth(
            embeddings.count, self.config.leaf_capacity, min(branchings)
        )
        logger.info("Bench trees share max_depth=%d", depth)
        failed = {query_id: error for _, report in rows for query_id, error in report.errors}
        for branching in branchings:
            tree = self.build(embeddings, branching, max_depth=depth)
            for beam_width in beam_widths:
                name, report = self.run_method("tree", embeddings, qrels, tree, beam_width=beam_width)
                rows.append((name, report))
                failed.update(report.errors)

        write_report_tsv(rows, args.out, timestamp=args.timestamp)
        self._print_report(rows)
        print(f"Frontier written to {args.out}")
        return self._report_failures(failed)

    # Evaluation

    def run_method(
        self,
        method: str,
        embeddings: EmbeddingSet,
        qrels: QRels,
        tree: Optional[KTree] = None,
        scorer: Optional[PairScorer] = None,
        beam_width=None,
    ) -> Tuple[str, EvalReport]:
        """Search every qrels query with ``method``; each query excludes itself."""
        query_ids = list(qrels)
        top_n = self.config.top_n
        results: Dict[int, SearchResult] = {}
        failures: Dict[int, str] = {}

        if method in ("tree", "tree-pairwise"):
            mode = "vector" if method == "tree" else "pairwise"
            params = self.search_params(beam_width)
            queries = [
                SearchQuery(
                    key=q,
                    vector=embeddings.vectors[q],
                    text=embeddings.items.text(q),
                    exclude_ids=frozenset({q}),
                )
                for q in query_ids
            ]
            batch = batch_search(
                tree, queries, params, mode=mode, scorer=scorer, items=embeddings.items, threads=self.config.threads
            )
            results, failures = batch.results, batch.errors
            name = f"tree-b{tree.branching}-beam{params.beam_width}"
            if mode == "pairwise":
                name = f"{name}-pairwise-r{tree.rep_count}"
        else:
            kdtree = kdtree_build(embeddings) if method == "kdtree" else None
            name = method
            for q in query_ids:
                try:
                    if method == "kdtree":
                        results[q] = kdtree_topn(kdtree, embeddings.vectors[q], top_n, exclude_ids={q})
                    elif method == "compute-all-pairwise":
                        results[q] = brute_force_pairwise(
                            embeddings.items, embeddings.items.text(q), scorer, top_n, exclude_ids={q}
                        )
                    else:
                        metric = method.rsplit("-", 1)[1]
                        results[q] = brute_force_topn(embeddings, embeddings.vectors[q], metric, top_n, exclude_ids={q})
                except KTreeError as e:
                    if isinstance(e, UnsupportedMetricError):
                        raise
                    logger.warning("Query %d failed under %s: %s", q, method, e)
                    failures[q] = str(e)

        report = evaluate(results, qrels, k=self.config.eval_cutoff, failures=failures)
        return name, report

    # Output

    def _write_search_output(self, results: Dict, fmt: str, output: Optional[str]) -> None:
        if fmt == "tsv":
            lines = ["query\trank\titem_id\tscore"]
            for key, result in results.items():
                lines.extend(
                    f"{key}\t{rank}\t{item_id}\t{score!r}"
                    for rank, (item_id, score) in enumerate(result.ranked, start=1)
                )
            body = "\n".join(lines) + "\n"
        else:
            body = json.dumps(
                [{"query": key, **result.as_dict()} for key, result in results.items()], indent=2
            ) + "\n"
        if output:
            Path(output).write_text(body, encoding="utf-8", newline="\n")
            print(f"Results written to {output}")
        else:
            sys.stdout.write(body)

    def _print_comparison(self, query: SearchQuery, result: SearchResult, embeddings, scorer, qrels) -> None:
        """Tree results next to compute-all's, with relevance marks when qrels are known."""
        if scorer is not None:
            exact = brute_force_pairwise(
                embeddings.items, query.text, scorer, self.config.top_n, exclude_ids=query.exclude_ids
            )
        else:
            exact = brute_force_topn(
                embeddings, query.vector, self.config.metric, self.config.top_n, exclude_ids=query.exclude_ids
            )
        relevant = qrels.relevant(query.key) if qrels is not None and query.key in qrels else frozenset()

        title = f"Query {query.key}: {query.text}" if query.text else f"Query {query.key}"
        table = Table(title=title)
        table.add_column("rank", justify="right")
        table.add_column(f"tree ({result.eval_count} evals)")
        table.add_column("score", justify="right")
        table.add_column(f"compute-all ({exact.eval_count} evals)")
        table.add_column("score", justify="right")

        def cell(ranked, rank):
            if rank >= len(ranked):
                return "", ""
            item_id, score = ranked[rank]
            mark = "* " if item_id in relevant else ""
            return f"{mark}{item_id} {embeddings.items.text(item_id)}", f"{score:.4f}"

        for rank in range(max(len(result.ranked), len(exact.ranked))):
            table.add_row(str(rank + 1), *cell(result.ranked, rank), *cell(exact.ranked, rank))
        console.print(table)

    def _print_report(self, rows: Sequence[Tuple[str, EvalReport]]) -> None:
        table = Table(title="Evaluation")
        for column in REPORT_COLUMNS:
            table.add_column(column, justify="left" if column == "method" else "right")
        for method, report in rows:
            table.add_row(*report_row(method, report))
        console.print(table)

    def _report_failures(self, failed: Dict) -> int:
        if not failed:
            return EXIT_OK
        print(f"{len(failed)} queries failed: {', '.join(str(key) for key in failed)}", file=sys.stderr)
        return EXIT_FAILURE


def parse_int_list(raw: str, what: str, minimum: int = 1) -> List[int]:
    """Parse a comma-separated list of integers."""
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"--{what} must be a comma-separated list of integers, got {raw!r}")
    if not values or any(v < minimum for v in values):
        raise ConfigurationError(f"--{what} values must be at least {minimum}, got {raw!r}")
    return values


def parse_beam_list(raw: str) -> list:
    """Parse a comma-separated list of beam widths; ``inf`` is the exhaustive beam."""
    values = [parse_beam_width(part) for part in raw.split(",") if part.strip()]
    if not values or any(v != EXHAUSTIVE_BEAM and v < 1 for v in values):
        raise ConfigurationError(f"--beam-widths values must be positive or {EXHAUSTIVE_BEAM!r}, got {raw!r}")
    return values


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value run configuration file")
    parser.add_argument("--verbose", action="store_true", default=None, help="Debug logging on stderr")
    parser.add_argument("--threads", type=int, help="Worker threads for builds and batch search")
    parser.add_argument("--no-normalize", dest="normalize", action="store_false", default=None,
                        help="Use embeddings as stored instead of unit-normalizing them")


def _add_tree_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--branching", type=int, help="Children per internal node")
    parser.add_argument("--leaf-capacity", type=int, help="Largest member set kept as a leaf")
    parser.add_argument("--rep-count", type=int, help="Representatives per internal node (0-5)")
    parser.add_argument("--max-depth", type=int, help="Turn every member set at this depth into a leaf")
    parser.add_argument("--seed", type=int, help="Seed for every k-means run")
    parser.add_argument("--max-iter", type=int, help="k-means iteration limit")
    parser.add_argument("--tol", type=float, help="k-means centroid movement tolerance")
    parser.add_argument("--init", choices=["kmeanspp", "random"], help="k-means initialization")


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--beam-width", help="Beam width, or 'inf' for the exhaustive beam")
    parser.add_argument("--top-n", type=int, help="Results per query")
    parser.add_argument("--metric", choices=["cosine", "euclidean"], help="Vector metric")
    parser.add_argument("--scorer-url", help="Pair scoring service endpoint")
    parser.add_argument("--local-scorer", action="store_true", help="Score pairs with the in-process lexical scorer")


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = argparse.ArgumentParser(
        prog="ktree",
        description="Hierarchical k-means tree retrieval",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Ingest command
    ingest_parser = subparsers.add_parser("ingest", help="Build corpus files from a question-pair TSV")
    ingest_parser.add_argument("--input", required=True, help="Question-pair TSV")
    ingest_parser.add_argument("--out-dir", required=True, help="Directory for items.tsv, qrels.tsv, pairs.tsv")
    _add_config_flags(ingest_parser)

    # Build command
    build_parser = subparsers.add_parser("build", help="Build a tree over an embedding file")
    build_parser.add_argument("--embeddings", required=True, help="EMB1 embedding file")
    build_parser.add_argument("--items", help="Items TSV matching the embeddings")
    build_parser.add_argument("--out", required=True, help="Tree file to write")
    build_parser.add_argument("--stats-json", help="Also write tree statistics as JSON")
    _add_tree_flags(build_parser)
    _add_config_flags(build_parser)

    # Search command
    search_parser = subparsers.add_parser("search", help="Search a tree")
    search_parser.add_argument("--tree", required=True, help="Tree file")
    search_parser.add_argument("--embeddings", required=True, help="EMB1 embedding file the tree was built over")
    search_parser.add_argument("--items", help="Items TSV (required for pairwise mode)")
    search_parser.add_argument("--query-id", type=int, action="append", help="Corpus item to use as a query")
    search_parser.add_argument("--query-text", action="append", help="Free-text query (pairwise mode)")
    search_parser.add_argument("--mode", choices=["vector", "pairwise"], help="Search mode")
    search_parser.add_argument("--format", choices=["json", "tsv"], default="json", help="Output format")
    search_parser.add_argument("--output", help="Write results here instead of stdout")
    search_parser.add_argument("--compare", action="store_true", help="Show compute-all results alongside")
    search_parser.add_argument("--qrels", help="Qrels TSV for relevance marks in --compare")
    _add_search_flags(search_parser)
    _add_config_flags(search_parser)

    # Eval command
    eval_parser = subparsers.add_parser("eval", help="Evaluate methods over all qrels queries")
    eval_parser.add_argument("--embeddings", required=True, help="EMB1 embedding file")
    eval_parser.add_argument("--items", help="Items TSV")
    eval_parser.add_argument("--qrels", required=True, help="Qrels TSV")
    eval_parser.add_argument("--tree", help="Tree file (tree methods)")
    eval_parser.add_argument("--method", action="append", help=f"One of {', '.join(METHODS)}; repeatable")
    eval_parser.add_argument("--report", required=True, help="TSV report to write")
    eval_parser.add_argument("--json-out", help="JSON report with per-query detail")
    eval_parser.add_argument("--timestamp", help="Value for the report's '# generated' header line")
    eval_parser.add_argument("--pairs", help="Labeled pairs TSV for the cosine MSE diagnostic")
    eval_parser.add_argument("--eval-cutoff", type=int, help="Ranked-list cutoff k")
    _add_search_flags(eval_parser)
    _add_config_flags(eval_parser)

    # Bench command
    bench_parser = subparsers.add_parser("bench", help="Sweep branching and beam width")
    bench_parser.add_argument("--embeddings", required=True, help="EMB1 embedding file")
    bench_parser.add_argument("--items", help="Items TSV")
    bench_parser.add_argument("--qrels", required=True, help="Qrels TSV")
    bench_parser.add_argument("--branchings", default="5,8,10", help="Comma-separated branching factors")
    bench_parser.add_argument("--beam-widths", default="5,10,20,inf", help="Comma-separated beam widths")
    bench_parser.add_argument("--out", required=True, help="Frontier TSV to write")
    bench_parser.add_argument("--reference", action="store_true", help="Add a compute-all row for the sweep metric")
    bench_parser.add_argument("--timestamp", help="Value for the report's '# generated' header line")
    bench_parser.add_argument("--eval-cutoff", type=int, help="Ranked-list cutoff k")
    _add_tree_flags(bench_parser)
    _add_search_flags(bench_parser)
    _add_config_flags(bench_parser)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(EXIT_CONFIG)

    try:
        config = resolve_config(vars(args), config_file=args.config)
        configure_logging(bool(config.verbose))
        cli = KTreeCLI(config)

        # Route to appropriate command
        command_map = {
            "ingest": cli.cmd_ingest,
            "build": cli.cmd_build,
            "search": cli.cmd_search,
            "eval": cli.cmd_eval,
            "bench": cli.cmd_bench,
        }
        try:
            status = command_map[args.command](args)
        finally:
            cli.close()
    except _VALIDATION_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)
    except (KTreeError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_FAILURE)
    sys.exit(status)


if __name__ == "__main__":
    main()
