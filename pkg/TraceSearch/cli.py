"""
The `tracesearch` entry point: the pipeline subcommands with Django's
settings and command machinery underneath.
"""
import os
import sys

SUBCOMMANDS = ('ingest', 'resolve', 'index', 'search', 'eval', 'synth')

USAGE = """usage: tracesearch <subcommand> [options]

subcommands:
  ingest    map raw source exports onto w5h trace objects
  resolve   merge people and places into entities
  index     build the frequency and text indexes
  search    rank a corpus against a structured query
  eval      run the known-item evaluation
  synth     generate a synthetic corpus with ground truth

global options: --config <path>  --format {text,json}  --threads N
run `tracesearch <subcommand> --help` for the options of one subcommand.
"""


def _exit_code(code):
    if code is None:
        return 0
    if isinstance(code, int):
        return code
    return 1


def main(argv=None, django_commands=False):
    """
    Run one subcommand and return its exit code. With `django_commands`
    any other Django management command (test, check, ...) is passed
    through as well.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help', 'help'):
        sys.stdout.write(USAGE)
        return 0
    if argv[0] not in SUBCOMMANDS and not django_commands:
        sys.stderr.write(f"tracesearch: unknown subcommand {argv[0]!r}\n{USAGE}")
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'TraceSearch.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    try:
        execute_from_command_line(['tracesearch', *argv])
    except SystemExit as exc:
        return _exit_code(exc.code)
    return 0


if __name__ == '__main__':
    sys.exit(main())
