import json
import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from .config import load_config


class W5HCommand(BaseCommand):
    """
    A base for every pipeline subcommand. It adds the global flags, builds
    the Config, and turns domain errors into CommandError so the process
    exits with status 1 and a one-line diagnostic.
    """
    # Options that map straight onto Config keys when given on the command line.
    config_overrides = {}

    def add_arguments(self, parser):
        parser.add_argument('--config', dest='config_file', help="JSON config file; flags override its values.")
        parser.add_argument('--format', choices=['text', 'json'], default='text', help="Output format.")
        parser.add_argument('--threads', type=int, help="Worker threads for the parallel phases.")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def get_config(self, options):
        overrides = {'threads': options.get('threads')}
        paths = {}
        for option, key in self.config_overrides.items():
            value = options.get(option)
            if value is None:
                continue
            if key.startswith('paths.'):
                paths[key.split('.', 1)[1]] = value
            else:
                overrides[key] = value
        if paths:
            overrides['paths'] = paths
        return load_config(options.get('config_file'), overrides)

    def handle(self, *args, **options):
        if options.get('verbosity', 1) >= 3:
            logging.getLogger().setLevel(logging.DEBUG)
        try:
            config = self.get_config(options)
            return self.run(config, **options)
        except ValidationError as exc:
            raise CommandError("; ".join(exc.messages))
        except OSError as exc:
            raise CommandError(f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(': '))

    def run(self, config, **options):
        raise NotImplementedError("Subcommands must implement run().")

    def emit(self, options, payload, text):
        """Write the command's result as JSON or as the prepared text."""
        if options.get('format') == 'json':
            self.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2))
        else:
            self.stdout.write(text)
