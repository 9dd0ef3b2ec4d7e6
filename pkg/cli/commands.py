from django.core.management.base import BaseCommand, CommandError

from .scenario import ScenarioError, parse_scenario
from .writers import table_text, write_table

EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_DEPLETION = 3


def validation_message(exc):
    if hasattr(exc, 'message_dict'):
        return '; '.join(f'{key}: {" ".join(texts)}' for key, texts in exc.message_dict.items())
    return ' '.join(exc.messages)


class ScenarioCommand(BaseCommand):
    """Base for commands that read one scenario file."""

    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Path to the scenario file')

    def load(self, path):
        try:
            return parse_scenario(path)
        except ScenarioError as exc:
            raise CommandError(str(exc), returncode=EXIT_INPUT)

    def fail_input(self, message):
        raise CommandError(message, returncode=EXIT_INPUT)

    def fail_invalid(self, exc):
        raise CommandError(validation_message(exc), returncode=EXIT_INPUT)

    def emit(self, frame, out):
        """Write ``frame`` to ``out``, or to stdout when no path is given."""
        if out is None:
            self.stdout.write(table_text(frame), ending='')
            return None
        path = write_table(frame, out)
        self.stdout.write(f'wrote {path}')
        return path

