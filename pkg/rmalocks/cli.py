"""
Command-line interface for rmalocks.
"""

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rmalocks import BenchResult, LockBenchmark
from rmalocks.config import DHT_MODES, BenchConfig
from rmalocks.core import seed_sweep
from rmalocks.exceptions import ConfigurationError, RmaLocksError
from rmalocks.utils.file_utils import dump_event_log, save_run_summary, write_csv_rows
from rmalocks.utils.topology import TopologySpec, format_int_list, parse_int_list, recommend_params

LOCK_CHOICES = ('spin', 'dmcs', 'rmamcs', 'rmarw', 'crw')
BENCH_CHOICES = ('lb', 'ecsb', 'sob', 'wcsb', 'warb', 'dht')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def create_parser() -> argparse.ArgumentParser:
    """Create command-line argument parser."""
    parser = argparse.ArgumentParser(
        prog='rmalocks',
        description='Benchmark distributed locks over a simulated one-sided RMA machine.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Latency of D-MCS with 4 processes
  rmalocks --bench lb --lock dmcs --procs 4

  # Empty-critical-section throughput of RMA-RW, 2% writers, 3-level machine
  rmalocks --bench ecsb --lock rmarw --procs 32 --levels 3 --fanout 2,2 --fw 0.02

  # Audited run over 5 seeds, CSV written to a file
  rmalocks --bench sob --lock rmamcs --procs 16 --audit --seeds 5 --out sob.csv

  # Hashtable with the reader-writer lock
  rmalocks --bench dht --dht-mode rw --procs 8 --iterations 1000 --fw 0.2

  # Suggested thresholds for a machine
  rmalocks --recommend --procs 64 --levels 3 --fanout 2,2
        """
    )

    # Run selection
    parser.add_argument('--bench', type=str.lower, choices=BENCH_CHOICES, default='lb',
                        help='Benchmark to run (default: lb)')
    parser.add_argument('--lock', type=str.lower, choices=LOCK_CHOICES, default='rmarw',
                        help='Lock to benchmark (default: rmarw)')
    parser.add_argument('--procs', '-P', type=int, default=4,
                        help='Number of simulated processes (default: 4)')
    parser.add_argument('--iterations', '-n', type=int, default=10000,
                        help='Lock operations per process (default: 10000)')
    parser.add_argument('--seed', type=int, default=0,
                        help='Random seed (default: 0)')
    parser.add_argument('--seeds', type=int, default=1,
                        help='Run this many consecutive seeds (default: 1)')

    # Topology and thresholds
    parser.add_argument('--levels', type=int, default=2,
                        help='Levels of the machine hierarchy (default: 2)')
    parser.add_argument('--fanout', type=str, default=None,
                        help='Comma-separated fan-out per level, e.g. 2,4 (default: 2 per level)')
    parser.add_argument('--tdc', type=int, default=None,
                        help='Ranks per reader counter, T_DC (default: processes per leaf element)')
    parser.add_argument('--tl', type=str, default=None,
                        help='Comma-separated locality thresholds T_L,1..T_L,N (default: 16 each)')
    parser.add_argument('--tr', type=int, default=64,
                        help='Reader threshold T_R (default: 64)')
    parser.add_argument('--fw', type=float, default=0.25,
                        help='Fraction of writers (default: 0.25)')

    # Timing
    parser.add_argument('--latency-intra', type=int, default=100,
                        help='Delay of operations inside a leaf element in ns (default: 100)')
    parser.add_argument('--latency-inter', type=str, default=None,
                        help='Comma-separated delays for levels 2..N in ns (default: 1000 per level of distance)')
    parser.add_argument('--service-ns', type=int, default=50,
                        help='Service time of the target rank per put or get in ns (default: 50)')
    parser.add_argument('--atomic-service-ns', type=int, default=200,
                        help='Service time of the target rank per accumulate, FAO or CAS in ns (default: 200)')
    parser.add_argument('--jitter-ns', type=int, default=0,
                        help='Maximum seeded jitter added to every operation in ns (default: 0)')
    parser.add_argument('--no-latency', action='store_true',
                        help='Charge no latency at all')
    parser.add_argument('--wallclock', action='store_true',
                        help='Run on real threads and timers instead of the virtual clock')
    parser.add_argument('--inject-latency', action='store_true',
                        help='Busy-wait the modelled latency in wall-clock mode')
    parser.add_argument('--backoff-min', type=int, default=16,
                        help='Initial spin back-off in ns (default: 16)')
    parser.add_argument('--backoff-max', type=int, default=256,
                        help='Maximum spin back-off in ns (default: 256)')
    parser.add_argument('--watchdog', type=float, default=60.0,
                        help='Wall-clock watchdog per run in seconds (default: 60)')

    # Hashtable
    parser.add_argument('--dht-mode', type=str.lower, choices=DHT_MODES, default='rw',
                        help='Synchronisation of the hashtable benchmark (default: rw)')
    parser.add_argument('--table-size', type=int, default=1024,
                        help='Hashtable slots (default: 1024)')
    parser.add_argument('--heap-size', type=int, default=1024,
                        help='Overflow heap entries (default: 1024)')
    parser.add_argument('--value-range', type=int, default=None,
                        help='Values are drawn from 1..VALUE_RANGE (default: 4 x table size)')

    # Verification and output
    parser.add_argument('--audit', action='store_true',
                        help='Record events and audit the run; exit 1 on a violation')
    parser.add_argument('--strict', action='store_true',
                        help='Reject operation results read before their flush')
    parser.add_argument('--log-dump', type=str, default=None, metavar='PATH',
                        help='Write the event log as seq,rank,event,level,element records')
    parser.add_argument('--out', '-o', type=str, default=None,
                        help='Write CSV to this file instead of stdout')
    parser.add_argument('--summary', type=str, default=None, metavar='PATH',
                        help='Write a JSON summary (configuration, metrics, audit verdicts) of every run')
    parser.add_argument('--inject-fault', action='store_true', help=argparse.SUPPRESS)

    # Utility arguments
    parser.add_argument('--list-locks', action='store_true',
                        help='List supported locks and exit')
    parser.add_argument('--list-benches', action='store_true',
                        help='List supported benchmarks and exit')
    parser.add_argument('--recommend', action='store_true',
                        help='Print recommended T_DC, T_L and T_R for the topology and exit')

    # Logging
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose logging')
    parser.add_argument('--quiet', '-q', action='store_true',
                        help='Suppress all output except errors')
    parser.add_argument('--log-file', type=str,
                        help='Path to log file (default: console only)')

    return parser


def setup_logging(verbose: bool, quiet: bool, log_file: Optional[str] = None) -> None:
    """Set up logging based on command-line options; console output goes to stderr."""
    if quiet:
        level = logging.ERROR
    elif verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)


def build_config(args: argparse.Namespace) -> BenchConfig:
    """Build a BenchConfig from command-line arguments."""
    fanout = parse_int_list(args.fanout)
    if fanout is not None and len(fanout) == 1 and args.levels > 2:
        fanout = fanout * (args.levels - 1)
    return BenchConfig(
        lock=args.lock,
        bench=args.bench,
        procs=args.procs,
        levels=args.levels,
        fanout=fanout,
        tdc=args.tdc,
        tl=parse_int_list(args.tl),
        tr=args.tr,
        fw=args.fw,
        iterations=args.iterations,
        seed=args.seed,
        latency_intra=args.latency_intra,
        latency_inter=parse_int_list(args.latency_inter),
        service_ns=args.service_ns,
        atomic_service_ns=args.atomic_service_ns,
        jitter_ns=args.jitter_ns,
        no_latency=args.no_latency,
        wallclock=args.wallclock,
        inject_latency=args.inject_latency,
        audit=args.audit,
        dht_mode=args.dht_mode,
        table_size=args.table_size,
        heap_size=args.heap_size,
        value_range=args.value_range,
        watchdog_s=args.watchdog,
        strict=args.strict,
        inject_fault=args.inject_fault,
        backoff_min_ns=args.backoff_min,
        backoff_max_ns=args.backoff_max,
    )


def list_entries(title: str, names: Sequence[str], descriptions: Optional[dict] = None) -> None:
    print(f"{title}:")
    print("=" * 30)
    for name in sorted(names):
        detail = (descriptions or {}).get(name, '')
        print(f"  {name}" + (f"  {detail}" if detail else ''))


def print_recommendation(config: BenchConfig) -> None:
    spec = TopologySpec(P=config.procs, N=config.levels, children_per_element=tuple(config.fanout))
    counters, params = recommend_params(spec, T_R=config.tr)
    print(f"--tdc {counters.T_DC} --tl {format_int_list(params.T_L)} --tr {params.T_R}")


def run_summary(result: BenchResult) -> Dict[str, Any]:
    """Configuration echo, metrics and audit verdicts of one run."""
    return {
        'config': asdict(result.config),
        'metrics': dict(result.metrics),
        'audits': [str(verdict) for verdict in result.audits],
        'audit_passed': result.audit_passed,
    }


def _dump_path(base: str, seed: int, multiple: bool) -> Path:
    path = Path(base)
    if not multiple:
        return path
    return path.with_name(f"{path.stem}_seed{seed}{path.suffix}")


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv``, run the requested benchmark(s) and write the CSV.

    Returns:
        0 on success, 1 on a failed run or audit, 2 on a usage error
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(args.verbose, args.quiet, getattr(args, 'log_file', None))
    orchestrator = LockBenchmark(log_level=logging.DEBUG if args.verbose else logging.INFO)

    if args.list_locks:
        list_entries("Supported locks", orchestrator.list_supported_locks())
        return EXIT_OK
    if args.list_benches:
        descriptions = {name: orchestrator.get_benchmark(name).description
                        for name in orchestrator.list_supported_benchmarks()}
        list_entries("Supported benchmarks", orchestrator.list_supported_benchmarks(), descriptions)
        return EXIT_OK

    try:
        config = build_config(args)
        if args.recommend:
            print_recommendation(config)
            return EXIT_OK
        configs = seed_sweep(config, args.seeds)
        orchestrator.validate(config)
    except ConfigurationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    rows = []
    summaries = []
    audits_passed = True
    try:
        for run_config in configs:
            result = orchestrator.run(run_config, record_events=args.log_dump is not None)
            rows.extend(result.csv_rows())
            summaries.append(run_summary(result))
            if args.log_dump and result.event_log is not None:
                dump_event_log(result.event_log.records(),
                               _dump_path(args.log_dump, run_config.seed, len(configs) > 1))
            # The hashtable integrity check runs on every hashtable run.
            if (run_config.audit or run_config.bench == 'dht') and not result.audit_passed:
                audits_passed = False
                for verdict in result.failed_audits:
                    print(f"Audit failed (seed {run_config.seed}): {verdict}", file=sys.stderr)
        write_csv_rows(rows, args.out)
        if args.summary:
            save_run_summary({'runs': summaries}, args.summary)
    except RmaLocksError as e:
        print(f"Error: {e}", file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE

    return EXIT_OK if audits_passed else EXIT_FAILURE


def main() -> None:
    """Main entry point for command-line interface."""
    sys.exit(run_cli())


if __name__ == '__main__':
    main()
