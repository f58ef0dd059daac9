"""Command line interface for the leaf-disease graph pipeline."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .config import GRAPH_KEYS, ConfigManager, PreprocessConfig, resolve_thread_count
from .data.dataset import scan_dataset, stratified_split
from .exceptions import CacheFormatError, GraphLeafError, InputError, UsageError
from .graphs.cache import dataset_summary, read_cache, write_cache, write_json
from .graphs.pipeline import build_graph_dataset
from .models.config import READOUTS, VARIANTS, ModelConfig
from .nn.checkpoint import load_checkpoint
from .training.evaluation import evaluate_model, predict_image
from .training.reports import write_report
from .training.trainer import train_model
from .utils.file_utils import ensure_directory_exists
from .utils.output_manager import OutputManager
from .utils.random_streams import SPLIT, SeedStreams

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _ArgumentParser(argparse.ArgumentParser):
    """Parser that reports bad command lines as ``UsageError``."""

    def error(self, message: str) -> None:
        raise UsageError(message)


def cache_prefix(prefix: str) -> str:
    """The prefix ``P`` of a cache pair, given ``P`` or either cache file."""
    text = str(prefix)
    for suffix in ('.train.ragc', '.test.ragc'):
        if text.endswith(suffix):
            text = text[:-len(suffix)]
    return text


def cache_pair(prefix: str) -> Tuple[Path, Path]:
    """``P.train.ragc`` and ``P.test.ragc`` for the prefix ``P``."""
    text = cache_prefix(prefix)
    return Path(f"{text}.train.ragc"), Path(f"{text}.test.ragc")


def graph_settings_path(prefix: str) -> Path:
    """``P.preprocess.json``: the graph settings a cache pair was built with."""
    return Path(f"{cache_prefix(prefix)}.preprocess.json")


class GraphLeafCLI:
    """Command line interface: preprocess, train, evaluate, predict, inspect."""

    def __init__(self):
        self.commands = {
            'preprocess': self.preprocess,
            'train': self.train,
            'evaluate': self.evaluate,
            'predict': self.predict,
            'inspect': self.inspect,
        }

    def create_parser(self) -> argparse.ArgumentParser:
        """Create and configure the argument parser."""
        parser = _ArgumentParser(
            prog='graphleaf',
            description='Classify leaf diseases with graph neural networks over superpixel graphs',
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
Examples:
  %(prog)s preprocess --data data/potato --out cache/potato --split 0.75 --seed 1
  %(prog)s train --cache cache/potato --model hybrid --epochs 100 --out runs/potato
  %(prog)s evaluate --checkpoint runs/potato/checkpoints/final.glwt --cache cache/potato.test.ragc
  %(prog)s predict --checkpoint runs/potato/checkpoints/best.glwt --image leaf.jpg
  %(prog)s inspect --cache cache/potato.train.ragc --format json
            """
        )
        self._add_common_arguments(parser, top_level=True)

        subparsers = parser.add_subparsers(dest='command', help='Available commands')
        S = argparse.SUPPRESS

        # Preprocess command
        pre = subparsers.add_parser('preprocess', help='Turn an image corpus into train/test graph caches')
        self._add_common_arguments(pre, config_file=True)
        pre.add_argument('--data', default=S, help='Corpus root with one subdirectory per class')
        pre.add_argument('--out', default=S,
                         help='Output prefix P; writes P.train.ragc, P.test.ragc and manifests')
        pre.add_argument('--segments', type=int, default=S, help='SLIC superpixels per image (default: 50)')
        pre.add_argument('--compactness', type=float, default=S,
                         help='SLIC colour/space trade-off (default: 10.0)')
        pre.add_argument('--max-iter', type=int, default=S, help='SLIC iterations (default: 10)')
        pre.add_argument('--split', type=float, default=S,
                         help='Per-class train fraction, strictly between 0 and 1 (default: 0.8)')
        pre.add_argument('--seed', type=int, default=S, help='Split seed (default: 0)')
        pre.add_argument('--image-size', type=int, default=S, help='Square resize target (default: 128)')

        # Train command
        train = subparsers.add_parser('train', help='Train a model on a cache pair')
        self._add_common_arguments(train, config_file=True)
        train.add_argument('--cache', default=S, help='Cache prefix P (reads P.train.ragc and P.test.ragc)')
        train.add_argument('--model', choices=VARIANTS, default=S, help='Model variant (default: hybrid)')
        train.add_argument('--epochs', type=int, default=S, help='Training epochs (default: 100)')
        train.add_argument('--batch', type=int, default=S, help='Batch size (default: 32)')
        train.add_argument('--lr', type=float, default=S, help='Adam learning rate (default: 0.001)')
        train.add_argument('--edge-aug-p', type=float, default=S,
                           help='Edge augmentation probability (default: 0.5)')
        train.add_argument('--seed', type=int, default=S, help='Run seed (default: 0)')
        train.add_argument('--out', default=S, help='Run directory')
        train.add_argument('--hidden-dim', type=int, default=S, help='Hidden width (default: 512)')
        train.add_argument('--heads', type=int, default=S, help='Attention heads (default: 2)')
        train.add_argument('--readout', choices=READOUTS, default=S, help='Graph readout (default: mean)')
        train.add_argument('--negative-slope', type=float, default=S,
                           help='LeakyReLU slope (default: 0.2)')

        # Evaluate command
        ev = subparsers.add_parser('evaluate', help='Evaluate a checkpoint on a cache file')
        self._add_common_arguments(ev)
        ev.add_argument('--checkpoint', required=True, help='Checkpoint file (.glwt)')
        ev.add_argument('--cache', required=True, help='Test cache file (.ragc)')
        ev.add_argument('--report', help='Report file (default: <checkpoint>.report.json)')
        ev.add_argument('--batch', type=int, default=32, help='Batch size (default: 32)')

        # Predict command
        pr = subparsers.add_parser('predict', help='Classify one image')
        self._add_common_arguments(pr)
        pr.add_argument('--checkpoint', required=True, help='Checkpoint file (.glwt)')
        pr.add_argument('--image', required=True, help='Image file')
        # Unset values come from the checkpoint, then from the preprocess defaults.
        pr.add_argument('--segments', type=int, default=S, help='SLIC superpixels')
        pr.add_argument('--compactness', type=float, default=S, help='SLIC colour/space trade-off')
        pr.add_argument('--max-iter', type=int, default=S, help='SLIC iterations')
        pr.add_argument('--image-size', type=int, default=S, help='Square resize target')

        # Inspect command
        ins = subparsers.add_parser('inspect', help='Summarise a cache file')
        self._add_common_arguments(ins)
        ins.add_argument('--cache', required=True, help='Cache file (.ragc)')
        ins.add_argument('--format', '-f', choices=['text', 'json'], default='text',
                         help='Output format (default: text)')
        ins.add_argument('--export', help='Also write the full cache content as JSON to this file')

        return parser

    @staticmethod
    def _add_common_arguments(parser: argparse.ArgumentParser, top_level: bool = False,
                              config_file: bool = False) -> None:
        default = 0 if top_level else argparse.SUPPRESS
        parser.add_argument('--verbose', '-v', action='count', default=default,
                            help='More logging (repeat for debug output)')
        parser.add_argument('--quiet', '-q', action='store_true',
                            default=False if top_level else argparse.SUPPRESS,
                            help='Only log errors')
        if config_file:
            parser.add_argument('--config', default=argparse.SUPPRESS,
                                help='Flat JSON or YAML file with flag values; flags win')

    @staticmethod
    def configure_logging(verbose: int, quiet: bool) -> None:
        if quiet:
            level = logging.ERROR
        else:
            level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)

    @staticmethod
    def _flags(args: argparse.Namespace, keys: List[str]) -> Dict[str, Any]:
        """Flags the user actually passed (unset ones are suppressed)."""
        given = vars(args)
        return {key: given[key] for key in keys if key in given}

    def preprocess(self, args: argparse.Namespace) -> None:
        """Scan, split and convert an image corpus into graph caches."""
        flags = self._flags(args, ['data', 'out', 'segments', 'compactness', 'max_iter',
                                   'split', 'seed', 'image_size'])
        cfg = ConfigManager(getattr(args, 'config', None)).build_preprocess_config(flags)
        if not cfg.data or not cfg.out:
            raise UsageError("preprocess needs --data and --out")
        workers = resolve_thread_count()

        manifest = scan_dataset(cfg.data)
        split_rng = SeedStreams(cfg.seed).fresh(SPLIT)
        train_manifest, test_manifest = stratified_split(manifest, cfg.split, split_rng)

        prefix = str(cfg.out)
        ensure_directory_exists(Path(prefix).parent)
        manifest.save(f"{prefix}.manifest.json")
        train_manifest.save(f"{prefix}.train.manifest.json")
        test_manifest.save(f"{prefix}.test.manifest.json")
        ConfigManager.save_graph_settings(cfg, graph_settings_path(prefix))

        train_path, test_path = cache_pair(prefix)
        for split_tag, part, path in (('train', train_manifest, train_path),
                                      ('test', test_manifest, test_path)):
            dataset = build_graph_dataset(part, split_tag, cfg, workers)
            write_cache(dataset, path)
            print(f"{split_tag}: {len(dataset)} graphs -> {path}")
        if manifest.skipped:
            print(f"skipped {len(manifest.skipped)} unreadable file(s)")

    def train(self, args: argparse.Namespace) -> None:
        """Train a model and write checkpoints, curves and the test report."""
        flags = self._flags(args, ['cache', 'model', 'epochs', 'batch', 'lr', 'edge_aug_p',
                                   'seed', 'out', 'hidden_dim', 'heads', 'readout',
                                   'negative_slope'])
        manager = ConfigManager(getattr(args, 'config', None))
        file_values = manager.load_file()
        cache = flags.get('cache', file_values.get('cache'))
        out = flags.get('out', file_values.get('out'))
        if not cache or not out:
            raise UsageError("train needs --cache and --out")

        train_path, test_path = cache_pair(cache)
        train_set = read_cache(train_path, 'train')
        test_set = read_cache(test_path, 'test')
        cfg = manager.build_run_config(flags, train_set.num_classes)
        cfg.preprocess = ConfigManager.load_graph_settings(graph_settings_path(cache))
        if cfg.preprocess is None:
            logger.warning(f"No preprocessing settings next to {cache}; predict will use defaults")

        output = OutputManager(cfg.out)
        result = train_model(cfg, train_set, test_set, output)
        last = result.curves[-1]
        print(f"run directory: {output.base_output_dir}")
        print(f"final checkpoint: {output.final_checkpoint_path}")
        print(f"best checkpoint: {output.best_checkpoint_path} (epoch {result.best_epoch})")
        print(f"final test accuracy: {last.test_acc:.4f}, test loss: {last.test_loss:.4f}")

    @staticmethod
    def _load_model(checkpoint: str):
        params, metadata = load_checkpoint(checkpoint)
        for key in ('model', 'class_names'):
            if key not in metadata:
                raise CacheFormatError(f"checkpoint {checkpoint} has no '{key}' metadata")
        return params, ModelConfig.from_dict(metadata['model']), metadata['class_names'], metadata

    def evaluate(self, args: argparse.Namespace) -> None:
        """Print the evaluation report and write it next to the checkpoint."""
        params, model_cfg, class_names, metadata = self._load_model(args.checkpoint)
        test_set = read_cache(args.cache)
        if list(test_set.class_names) != list(class_names):
            raise InputError(f"cache classes {test_set.class_names} do not match the "
                             f"checkpoint's {class_names}")
        report = evaluate_model(params, model_cfg, test_set, args.batch)
        report.extras.update({
            "checkpoint": str(args.checkpoint),
            "cache": str(args.cache),
            "epoch": metadata.get('epoch'),
            "seed": metadata.get('seed'),
            "config": {"model": model_cfg.to_dict()},
        })
        report_path = Path(args.report) if args.report else \
            Path(args.checkpoint).with_suffix('.report.json')
        payload = report.to_dict()
        write_report(payload, report_path)
        print(json.dumps(payload, indent=2, sort_keys=True))

    def predict(self, args: argparse.Namespace) -> None:
        """Print the predicted class and the probability vector."""
        params, model_cfg, class_names, metadata = self._load_model(args.checkpoint)
        settings = dict(metadata.get('preprocess') or {})
        settings.update(self._flags(args, list(GRAPH_KEYS)))
        try:
            preprocess_cfg = PreprocessConfig.from_graph_settings(settings)
            preprocess_cfg.validate()
        except InputError as e:
            raise UsageError(f"preprocessing settings {settings}: {e.detail}")
        prediction = predict_image(args.image, params, model_cfg, class_names, preprocess_cfg)
        print(json.dumps(prediction.to_dict(class_names), indent=2))

    def inspect(self, args: argparse.Namespace) -> None:
        """Print the class histogram and node/edge statistics of a cache file."""
        dataset = read_cache(args.cache)
        summary = dataset_summary(dataset)
        if args.export:
            write_json(dataset, args.export)
        if args.format == 'json':
            print(json.dumps(summary, indent=2))
            return
        print(f"Cache: {args.cache}")
        print(f"Split: {summary['split']}")
        print(f"Graphs: {summary['num_graphs']} in {summary['num_classes']} classes")
        for name, count in summary['class_histogram'].items():
            print(f"  {name:20} {count}")
        for key in ('nodes', 'edges'):
            stats = summary[key]
            print(f"{key.capitalize()} per graph: min {stats['min']}, "
                  f"mean {stats['mean']:.2f}, max {stats['max']}")
        print(f"Mean degree: {summary['mean_degree']:.2f}")

    def run(self, args: Optional[List[str]] = None) -> int:
        """Run the CLI with the given arguments and return the exit code."""
        parser = self.create_parser()
        try:
            parsed_args = parser.parse_args(args)
            if not parsed_args.command:
                parser.print_help()
                return 0
            self.configure_logging(parsed_args.verbose, parsed_args.quiet)
            self.commands[parsed_args.command](parsed_args)
            return 0
        except SystemExit as e:
            # --help and friends
            return e.code if isinstance(e.code, int) else 0
        except GraphLeafError as e:
            print(f"error: {e.category}: {e.detail}", file=sys.stderr)
            return e.exit_code
        except KeyboardInterrupt:
            print("error: interrupted: operation cancelled by user", file=sys.stderr)
            return 130
        except Exception as e:
            logger.debug("Unhandled error", exc_info=True)
            print(f"error: internal: {e}", file=sys.stderr)
            return 2


def main() -> None:
    """Main entry point for the CLI."""
    cli = GraphLeafCLI()
    sys.exit(cli.run())


if __name__ == '__main__':
    main()
