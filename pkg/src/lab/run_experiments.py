"""
Experiment runner: traces, jacobian, scan and foliation subcommands.

    python -m src.lab.run_experiments traces --config experiments/n4.json --out output/traces.json

Exit codes: 0 success, 1 usage/config/I-O error, 2 mathematical validity failure.
"""
import argparse
import asyncio
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from tqdm.asyncio import tqdm

from ..errors import (
    ChartDimensionError,
    DegenerateConfiguration,
    EmptyInput,
    GeometryError,
    HolonomyLabError,
    TooFewPunctures,
    ValidityError,
)
from ..geometry.quaddiff import from_chart
from ..geometry.surface import normalize_punctures
from ..holonomy.foliation import (
    LeafState,
    compactified_section_probe,
    conjugacy_check,
    diagonal_section,
    glue_separation,
    leaf_loop_monodromy,
    leaf_transport,
    random_leaves,
    winding_circle,
)
from ..holonomy.holmap import evaluate_holonomy, fiber_probe, injectivity_probe, jacobian_fd
from ..models import (
    ExperimentConfig,
    FoliationReport,
    JacobianReportModel,
    RelationModel,
    ScanReport,
    ScanRow,
    SectionProbeModel,
    TraceReport,
    WindingSweepEntry,
    decode_complex,
    decode_point,
    encode_complex,
    encode_point,
)
from .cache import ScanCache, fingerprint
from .reports import make_metadata, write_report

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2

# Library errors caused by the config itself; every other HolonomyLabError is a numerical failure
INPUT_ERRORS = (DegenerateConfiguration, TooFewPunctures, GeometryError, ChartDimensionError, EmptyInput)

DEFAULT_MODULUS_STEP = 0.3 + 0.4j
GLUE_SAMPLES = 200


def load_config(path: str) -> ExperimentConfig:
    """Read and validate an experiment config file"""
    with open(path, "r") as f:
        data = json.load(f)
    return ExperimentConfig.model_validate(data)


class ExperimentRunner:
    """Main orchestrator for experiments"""

    def __init__(self, config: ExperimentConfig, output_file: Optional[str] = None,
                 output_format: Optional[str] = None, seed: Optional[int] = None,
                 cache: Optional[ScanCache] = None, max_concurrent: Optional[int] = None):
        self.config = config
        self.settings = config.settings
        self.output_format = output_format or config.output_format
        self.seed = config.seed if seed is None else seed
        self.output_file = Path(output_file) if output_file else None
        self.cache = cache
        self.max_concurrent = max_concurrent or int(os.getenv("HOLLAB_MAX_CONCURRENT", "4"))
        self.basepoint = decode_complex(config.basepoint) if config.basepoint is not None else None

    def format_for(self, command: str) -> str:
        if self.output_format:
            return self.output_format
        return "csv" if command == "scan" else "json"

    def output_path(self, command: str) -> Path:
        return self.output_file or Path("output") / f"{command}.{self.format_for(command)}"

    def resolve_surface(self) -> Tuple[Tuple[complex, ...], int]:
        """
        Chart point of the configured surface.

        Raw punctures are normalized first; without theta the moduli default to
        multiples of 0.3+0.4i and the accessory parameters to 0.
        """
        config = self.config
        n = config.n
        if config.punctures is not None:
            raw = [decode_point(p) for p in config.punctures]
            normalized, _ = normalize_punctures(raw, self.basepoint, self.settings.loop_radius_fraction)
            accessory = [decode_complex(c) for c in config.accessory] if config.accessory else [0j] * (n - 3)
            if len(accessory) != n - 3:
                raise ChartDimensionError(f"Expected {n - 3} accessory parameters, got {len(accessory)}")
            return tuple(normalized.moduli) + tuple(accessory), n
        if config.theta is not None:
            theta = tuple(decode_complex(t) for t in config.theta)
            if len(theta) != 2 * n - 6:
                raise ChartDimensionError(f"theta has length {len(theta)}, expected {2 * n - 6}")
            return theta, n
        moduli = [(k + 1) * DEFAULT_MODULUS_STEP for k in range(n - 3)]
        return tuple(moduli) + (0j,) * (n - 3), n

    def run_traces(self) -> int:
        """Peripheral traces, relation and non-elementarity at the configured point"""
        theta, n = self.resolve_surface()
        evaluation = evaluate_holonomy(theta, n, self.settings, self.basepoint, strict=False)
        character = evaluation.character.values if evaluation.character is not None else []
        report = TraceReport(
            settings=self.settings,
            n=n,
            punctures=[encode_point(p) for p in evaluation.qd.config.punctures],
            theta=[encode_complex(t) for t in theta],
            loop_order=evaluation.loop_order,
            raw_traces=[encode_complex(t) for t in evaluation.raw_traces],
            peripheral_traces=[encode_complex(np.trace(m)) for m in evaluation.lifts],
            parabolic_defects=evaluation.parabolic_defects,
            relation=RelationModel(kind=evaluation.relation.kind, defect=evaluation.relation.defect),
            nonelementary=evaluation.nonelementary,
            commutator_defect=evaluation.commutator_defect,
            character=[encode_complex(v) for v in character],
            passed=evaluation.passed,
            failures=evaluation.failures,
            metadata=make_metadata("traces"),
        )
        path = write_report(report, self.output_path("traces"), self.format_for("traces"))

        for index, trace in zip(evaluation.loop_order, evaluation.lifts):
            print(f"  puncture {index}: trace {complex(np.trace(trace)):.12g}")
        print(f"Relation: {evaluation.relation.kind} (defect {evaluation.relation.defect:.3e})")
        print(f"Non-elementary: {evaluation.nonelementary} (max |tr[A,B] - 2| = {evaluation.commutator_defect:.3e})")
        for failure in evaluation.failures:
            print(f"  FAILED {failure}")
        print(f"Saved report to {path}")
        return EXIT_OK if evaluation.passed else EXIT_INVALID

    def run_jacobian(self) -> int:
        """Rank, holomorphy, fibre rank and injectivity at the configured point"""
        theta, n = self.resolve_surface()
        expected = 2 * n - 6
        if n == 3:
            report = JacobianReportModel(
                settings=self.settings, n=n, theta=[], zero_dimensional=True, expected_rank=0,
                fd_step=self.settings.fd_step, seed=self.seed, passed=True, metadata=make_metadata("jacobian"),
            )
            path = write_report(report, self.output_path("jacobian"), self.format_for("jacobian"))
            print(f"n = 3: zero-dimensional domain, nothing to differentiate. Saved report to {path}")
            return EXIT_OK

        jacobian = jacobian_fd(theta, self.settings.fd_step, self.settings, self.basepoint)
        fiber = fiber_probe(theta, self.settings, self.basepoint, jacobian=jacobian)
        probe = self.config.probe
        injectivity = injectivity_probe(
            theta, probe.radius, probe.samples, self.seed, self.settings, self.basepoint,
            sigma_min=jacobian.sigma_min,
        )
        passed = jacobian.rank == expected
        report = JacobianReportModel(
            settings=self.settings,
            n=n,
            theta=[encode_complex(t) for t in theta],
            singular_values=[float(s) for s in jacobian.singular_values],
            rank=jacobian.rank,
            expected_rank=expected,
            condition_ratio=jacobian.condition_ratio,
            fd_step=jacobian.fd_step,
            cauchy_riemann_defect=jacobian.cauchy_riemann_defect,
            fiber_rank=fiber.fiber_rank,
            moduli_rank=fiber.moduli_rank,
            injectivity_pairs=injectivity.pairs,
            injectivity_violations=injectivity.violations,
            injectivity_resampled=injectivity.resampled,
            injectivity_exhausted=injectivity.exhausted,
            seed=self.seed,
            passed=passed,
            metadata=make_metadata("jacobian"),
        )
        path = write_report(report, self.output_path("jacobian"), self.format_for("jacobian"))

        print(f"Rank {jacobian.rank} of {expected} (sigma_min/sigma_max = {jacobian.condition_ratio:.3e})")
        print(f"Cauchy-Riemann defect: {jacobian.cauchy_riemann_defect:.3e}")
        print(f"Fibre rank {fiber.fiber_rank}, moduli rank {fiber.moduli_rank} (expected {fiber.expected_rank})")
        print(f"Injectivity: {injectivity.violations} violations in {injectivity.pairs} pairs "
              f"({injectivity.resampled} resampled, {injectivity.exhausted} exhausted)")
        print(f"Saved report to {path}")
        return EXIT_OK if passed else EXIT_INVALID

    def scan_point(self, index: int, theta: List[complex]) -> ScanRow:
        """Jacobian rank and fibre rank at one grid point; failures become flagged rows"""
        n = self.config.n
        encoded = [encode_complex(t) for t in theta]
        key = fingerprint(theta, n, self.basepoint, self.settings)
        if self.cache is not None:
            cached = self.cache.load(key, index)
            if cached is not None:
                return cached
        try:
            if len(theta) != 2 * n - 6:
                raise ChartDimensionError(f"theta has length {len(theta)}, expected {2 * n - 6}")
            jacobian = jacobian_fd(theta, self.settings.fd_step, self.settings, self.basepoint)
            fiber = fiber_probe(theta, self.settings, self.basepoint, jacobian=jacobian)
            row = ScanRow(
                index=index,
                theta=encoded,
                singular_values=[float(s) for s in jacobian.singular_values],
                rank=jacobian.rank,
                cauchy_riemann_defect=jacobian.cauchy_riemann_defect,
                fiber_rank=fiber.fiber_rank,
                flagged=jacobian.rank != 2 * n - 6 or fiber.fiber_rank != n - 3,
            )
        except (HolonomyLabError, ValueError) as e:
            logger.info("grid point %d flagged: %s", index, e)
            row = ScanRow(index=index, theta=encoded, flagged=True, error=f"{type(e).__name__}: {e}")
        if self.cache is not None:
            self.cache.save(key, row)
        return row

    async def run_scan(self) -> int:
        """Evaluate every grid point concurrently; rows keep grid order"""
        points = self.config.grid.expand()
        semaphore = asyncio.Semaphore(self.max_concurrent)

        async def process_point(index, theta):
            async with semaphore:
                return await asyncio.to_thread(self.scan_point, index, theta)

        rows: List[Optional[ScanRow]] = [None] * len(points)
        tasks = [process_point(i, theta) for i, theta in enumerate(points)]
        for coro in tqdm.as_completed(tasks, desc="Scanning grid", total=len(tasks)):
            row = await coro
            rows[row.index] = row

        report = ScanReport(settings=self.settings, n=self.config.n, rows=rows, metadata=make_metadata("scan"))
        path = write_report(report, self.output_path("scan"), self.format_for("scan"))
        flagged = sum(row.flagged for row in rows)
        print(f"\nScanned {len(rows)} points, {flagged} flagged. Saved to {path}")
        return EXIT_OK

    def run_foliation(self) -> int:
        """Leaf monodromy sweep, gluing conjugacy, diagonal section and section probes"""
        options = self.config.foliation
        tol = options.tolerance
        start = LeafState(decode_complex(options.start), 0j)

        sweep = []
        for k in options.windings:
            closed = leaf_loop_monodromy(start, k)
            numeric = leaf_transport(start, winding_circle(start.u, k))
            residual = max(abs(numeric.v - closed.v), numeric.numeric_residual)
            sweep.append(WindingSweepEntry(
                windings=k,
                v_before=encode_complex(start.v),
                v_after=encode_complex(closed.v),
                closed_form_shift=encode_complex(closed.v - start.v),
                numeric_residual=residual,
            ))

        conjugacy = conjugacy_check(random_leaves(options.leaves, self.seed), tol)
        rng = np.random.default_rng(self.seed)
        taus = [complex(rng.uniform(0, 1), rng.uniform(0.1, 2.0)) for _ in range(options.leaves)]
        diagonal = max(abs(v) for v in diagonal_section(taus))
        separation = glue_separation(GLUE_SAMPLES, self.seed)

        probes = []
        if options.section_probe:
            theta, n = self.resolve_surface()
            qd = from_chart(theta, n, self.basepoint, self.settings.loop_radius_fraction)
            for index in qd.config.finite_indices:
                probe = compactified_section_probe(qd, index, self.settings, options.section_depths)
                probes.append(SectionProbeModel(
                    puncture_index=index,
                    distances=probe.distances,
                    u_moduli=probe.u_moduli,
                    ratio_drift=probe.ratio_drift,
                    monotone=probe.monotone,
                    max_v=max(abs(v) for v in probe.v_values),
                ))

        passed = (
            all(entry.numeric_residual < tol for entry in sweep)
            and all(entry.closed_form_shift == [-float(entry.windings), 0.0] for entry in sweep)
            and conjugacy.passed
            and diagonal == 0
            and separation > 0
            and all(p.monotone and p.max_v == 0 for p in probes)
        )
        report = FoliationReport(
            tolerance=tol,
            seed=self.seed,
            winding_sweep=sweep,
            conjugacy_max_residual=conjugacy.max_residual,
            conjugacy_samples=conjugacy.samples,
            diagonal_max_v=diagonal,
            glue_min_separation=separation,
            section_probes=probes,
            passed=passed,
            metadata=make_metadata("foliation"),
        )
        path = write_report(report, self.output_path("foliation"), self.format_for("foliation"))

        for entry in sweep:
            print(f"  k = {entry.windings:+d}: v -> {complex(*entry.v_after):.6g} (residual {entry.numeric_residual:.2e})")
        print(f"Conjugacy residual {conjugacy.max_residual:.3e} over {conjugacy.samples} leaves")
        print(f"Diagonal section max |v| = {diagonal:.3e}, gluing separation {separation:.3e}")
        for p in probes:
            print(f"  section at puncture {p.puncture_index}: monotone {p.monotone}, drift {p.ratio_drift:.3e}")
        print(f"Saved report to {path}")
        return EXIT_OK if passed else EXIT_INVALID

    def run(self, command: str) -> int:
        if command == "traces":
            return self.run_traces()
        if command == "jacobian":
            return self.run_jacobian()
        if command == "scan":
            return asyncio.run(self.run_scan())
        if command == "foliation":
            return self.run_foliation()
        raise ValueError(f"Unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Holonomy map experiments")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("traces", "Peripheral traces, relation and non-elementarity"),
        ("jacobian", "Rank of the character-map Jacobian"),
        ("scan", "Jacobian ranks over a grid of chart points"),
        ("foliation", "Checks of the compactification local model"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="Experiment config JSON file")
        sub.add_argument("--out", default=None, help="Report file (default output/<command>.<format>)")
        sub.add_argument("--format", choices=["json", "csv"], default=None, help="Report format")
        sub.add_argument("--seed", type=int, default=None, help="Override the config seed")
        sub.add_argument("--no-cache", action="store_true", help="Do not read or write the scan cache")
        sub.add_argument("--cache-dir", default=None, help="Scan cache directory (default $HOLLAB_CACHE_DIR)")
        sub.add_argument("--max-concurrent", type=int, default=None, help="Concurrent grid points in a scan")
        sub.add_argument("--verbose", action="store_true", help="Show library log messages")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        cache = None
        if args.command == "scan" and not args.no_cache:
            cache = ScanCache(args.cache_dir)
        runner = ExperimentRunner(config, args.out, args.format, args.seed, cache, args.max_concurrent)
        return runner.run(args.command)
    except ValidityError as e:
        print(f"Validity check failed: {e}")
        return EXIT_INVALID
    except INPUT_ERRORS as e:
        print(f"Error: {type(e).__name__}: {e}")
        return EXIT_USAGE
    except HolonomyLabError as e:
        print(f"Numerical failure: {type(e).__name__}: {e}")
        return EXIT_INVALID
    except (OSError, ValueError) as e:
        print(f"Error: {type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
