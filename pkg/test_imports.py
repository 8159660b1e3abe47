import importlib
import traceback

MODULES = [
    'holder_metrics.config',
    'holder_metrics.geometry',
    'holder_metrics.catalog',
    'holder_metrics.analyzers',
    'holder_metrics.report',
    'holder_metrics.verification',
    'holder_metrics.cli',
]


def test_imports():
    failures = []
    for name in MODULES:
        try:
            importlib.import_module(name)
            print(f"✓ {name} imported successfully")
        except Exception as e:
            print(f"✗ Error importing {name}: {e}")
            traceback.print_exc()
            failures.append(name)
    assert not failures, failures


def test_parser_builds():
    from holder_metrics.cli import build_parser
    parser = build_parser()
    args = parser.parse_args(['verify', 'all'])
    print("✓ build_parser() executed successfully")
    assert args.command == 'verify'


if __name__ == '__main__':
    test_imports()
    test_parser_builds()
