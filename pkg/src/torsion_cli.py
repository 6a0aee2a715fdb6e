"""
Torsion Prediction CLI
======================
    python src/torsion_cli.py synth     --out data/helix
    python src/torsion_cli.py dihedrals data/helix/H000.pdb --out dihedrals.csv
    python src/torsion_cli.py encode    --scheme BLOSUM62 --seq ACDE
    python src/torsion_cli.py dataset   --manifest data/helix/manifest.txt --window 7 --out data/windows
    python src/torsion_cli.py train     --data data/windows --model LSTM1 --checkpoint models/lstm1.bin
    python src/torsion_cli.py evaluate  --checkpoint models/lstm1.bin --data data/windows/test.csv
    python src/torsion_cli.py sweep     --manifest data/helix/manifest.txt --grid grid.yaml --journal sweep.jsonl
    python src/torsion_cli.py report    --journal sweep.jsonl --metric mae --target phi --top 20
    python src/torsion_cli.py gradcheck --model LSTM2 --window 5
"""

import argparse
import os
import sys

import numpy as np
import pandas as pd

from backbone_geometry import DihedralExtractor
from model_checkpoint import load_checkpoint, save_checkpoint
from model_training import TrainingConfig, Trainer, evaluate
from neural_net import MODEL_NAMES, build_model, gradient_check
from residue_encoder import SCHEME_NAMES, encode_sequence, get_scheme, register_scheme
from result_tables import RankMetric, rank_results, render_table, summarize_top, table_to_csv
from substitution_matrices import ALPHABET, load_matrix_file
from sweep_harness import SweepData, SweepGrid, SweepRunner, read_journal
from synthetic_corpus import HelixCorpusGenerator
from window_dataset import DatasetBuilder, TargetMode, WindowConfig, read_partition


# ------------------------------------------------------------------
# Subcommands
# ------------------------------------------------------------------
def cmd_synth(args) -> int:
    generator = HelixCorpusGenerator(n_chains=args.chains, length=args.length,
                                     noise=args.noise, seed=args.seed)
    generator.save(generator.generate(), args.out, class_label=args.class_label)
    return 0


def cmd_dihedrals(args) -> int:
    extractor = DihedralExtractor()
    df = extractor.run(args.paths)
    if args.out:
        extractor.save(df, args.out)
    else:
        print(df.to_string(index=False))
    return 0


def cmd_encode(args) -> int:
    if args.matrix_file:
        register_scheme(load_matrix_file(args.matrix_file, args.scheme))
    scheme = get_scheme(args.scheme, normalize=args.normalize)
    encoded = encode_sequence(scheme, args.sequence)
    df = pd.DataFrame(encoded, index=list(args.sequence), columns=list(ALPHABET))
    df.to_csv(sys.stdout)
    return 0


def cmd_dataset(args) -> int:
    config = WindowConfig(window_size=args.window, scheme=args.scheme,
                          target_mode=args.target, normalize=args.normalize)
    builder = DatasetBuilder()
    builder.load(args.manifest, class_label=args.class_label)
    builder.build(config, args.seed)
    builder.save(args.out)
    return 0


def _training_config(args) -> TrainingConfig:
    return TrainingConfig(learning_rate=args.lr, dropout_rate=args.dropout,
                          batch_size=args.batch_size, max_epochs=args.epochs,
                          hidden_width=args.hidden, seed=args.seed)


def cmd_train(args) -> int:
    train_set = read_partition(os.path.join(args.data, 'train.csv'))
    val_set = read_partition(os.path.join(args.data, 'validation.csv'))
    config = _training_config(args)
    model = build_model(args.model, train_set.targets.shape[1], config.hidden_width,
                        seed=config.seed, lstm_layers=args.lstm_layers,
                        window_size=train_set.window_size)

    print("=" * 60)
    print(f"TRAINING {model.spec.name} ({model.parameter_count():,} parameters)")
    print("=" * 60)
    trained, history = Trainer(config, verbose=True).fit(model, train_set, val_set)
    save_checkpoint(trained, args.checkpoint)
    print(f"✓ Checkpoint saved to {args.checkpoint}")
    if args.history:
        history.to_csv(args.history)
        print(f"✓ History saved to {args.history}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_checkpoint(args.checkpoint)
    data = read_partition(args.data)
    report = evaluate(model, data, TargetMode(args.target))
    print(f"Samples:    {report.loss.n}")
    print(f"Codec MSE:  {report.loss.mse:.5f}")
    print(f"Codec RMSE: {report.loss.rmse:.5f}")
    print(f"Codec MAE:  {report.loss.mae:.5f}")
    if report.mae_phi is not None:
        print(f"Phi MAE:    {report.mae_phi:.3f}°")
    if report.mae_psi is not None:
        print(f"Psi MAE:    {report.mae_psi:.3f}°")
    return 0


def cmd_sweep(args) -> int:
    if args.focused:
        grid = SweepGrid.focused()
    elif args.grid:
        grid = SweepGrid.from_yaml(args.grid)
    else:
        grid = SweepGrid()
    data = SweepData.from_manifest(args.manifest, args.seed, args.class_label, verbose=True)
    SweepRunner().run(grid, data, TrainingConfig(seed=args.seed), workers=args.workers,
                      journal_path=args.journal, resume=args.resume)
    return 0


def cmd_report(args) -> int:
    target = None if args.target == 'all' else TargetMode(args.target)
    rows = rank_results(read_journal(args.journal), RankMetric(args.metric), target, args.top)
    title = f"Lowest {RankMetric(args.metric).name} ({args.target})"
    print(render_table(rows, title=title))
    if rows:
        counts = summarize_top(rows)
        print(f"\nEncodings in top {len(rows)}: {counts['encoding']}")
        print(f"Window sizes in top {len(rows)}: {counts['window_size']}")
    if args.csv:
        table_to_csv(rows, args.csv)
        print(f"✓ Table saved to {args.csv}")
    return 0


def cmd_gradcheck(args) -> int:
    output_width = TargetMode(args.target).output_width
    model = build_model(args.model, output_width, args.hidden, seed=args.seed,
                        lstm_layers=args.lstm_layers, window_size=args.window)
    rng = np.random.default_rng(args.seed)
    X = get_scheme('one-hot').table[rng.integers(0, 20, size=(args.batch, args.window))]
    Y = rng.uniform(-1.0, 1.0, size=(args.batch, output_width))
    error = gradient_check(model, X, Y)
    status = '✓' if error < args.tolerance else '✗'
    print(f"{status} {model.spec.name}: max relative error {error:.3e} "
          f"over {model.parameter_count()} parameters")
    return 0 if error < args.tolerance else 1


# ------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Protein backbone torsion-angle prediction")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('synth', help='write a synthetic helical corpus and manifest')
    p.add_argument('--out', required=True)
    p.add_argument('--chains', type=int, default=50)
    p.add_argument('--length', type=int, default=30)
    p.add_argument('--noise', type=float, default=3.0)
    p.add_argument('--seed', type=int, default=42)
    p.add_argument('--class-label', default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('dihedrals', help='extract phi/psi/omega from PDB files')
    p.add_argument('paths', nargs='+')
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_dihedrals)

    p = sub.add_parser('encode', help='encode a residue sequence')
    p.add_argument('--scheme', default='one-hot', help=f"one of {SCHEME_NAMES} or a --matrix-file name")
    p.add_argument('--seq', '--sequence', dest='sequence', required=True)
    p.add_argument('--normalize', action='store_true')
    p.add_argument('--matrix-file', default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser('dataset', help='build windowed train/validation/test partitions')
    p.add_argument('--manifest', required=True)
    p.add_argument('--scheme', default='one-hot')
    p.add_argument('--window', type=int, required=True)
    p.add_argument('--target', choices=[m.value for m in TargetMode], default='both')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--normalize', action='store_true')
    p.add_argument('--class-label', default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_dataset)

    for name, func in (('train', cmd_train), ('gradcheck', cmd_gradcheck)):
        p = sub.add_parser(name)
        p.add_argument('--model', choices=MODEL_NAMES, default='LSTM1')
        p.add_argument('--hidden', type=int, default=32 if name == 'train' else 4)
        p.add_argument('--lstm-layers', type=int, default=None)
        p.add_argument('--seed', type=int, default=0)
        p.set_defaults(func=func)
        if name == 'train':
            p.add_argument('--data', required=True, help='directory written by `dataset`')
            p.add_argument('--epochs', type=int, default=50)
            p.add_argument('--lr', type=float, default=0.01)
            p.add_argument('--batch-size', type=int, default=4096)
            p.add_argument('--dropout', type=float, default=0.30)
            p.add_argument('--checkpoint', required=True)
            p.add_argument('--history', default=None)
        else:
            p.add_argument('--window', type=int, default=5)
            p.add_argument('--batch', type=int, default=3)
            p.add_argument('--target', choices=[m.value for m in TargetMode], default='both')
            p.add_argument('--tolerance', type=float, default=1e-4)

    p = sub.add_parser('evaluate', help='score a checkpoint on a partition file')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--data', required=True)
    p.add_argument('--target', choices=[m.value for m in TargetMode], default='both')
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser('sweep', help='run the encoding x window x model x target grid')
    p.add_argument('--manifest', required=True)
    p.add_argument('--grid', default=None, help='YAML grid file')
    p.add_argument('--focused', action='store_true', help='use the narrowed LSTM5 grid')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--journal', required=True)
    p.add_argument('--resume', action='store_true')
    p.add_argument('--class-label', default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('report', help='rank journaled sweep results')
    p.add_argument('--journal', required=True)
    p.add_argument('--metric', choices=[m.value for m in RankMetric], default='mae')
    p.add_argument('--target', choices=[m.value for m in TargetMode] + ['all'], default='all')
    p.add_argument('--top', type=int, default=20)
    p.add_argument('--csv', default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
