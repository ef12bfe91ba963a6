"""Run the property and oracle suite."""

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from competition.management.base import EXIT_VERIFICATION
from competition.verification import FAULTS, run_suite


class Command(BaseCommand):
    """Usage:
        python manage.py verify --level fast
        python manage.py verify --level full --workers 8
        python manage.py verify --inject-fault conservation   # must fail
    """
    help = 'Runs the verification suite; exits with status 3 if a gating check fails'

    def add_arguments(self, parser):
        parser.add_argument('--level', choices=['fast', 'full'], default='fast')
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--inject-fault', choices=FAULTS, default=None,
                            help='Corrupt the engine on purpose to check that the suite notices')

    def handle(self, *args, **options):
        workers = options['workers'] or settings.COMPETITION['WORKERS']
        results = run_suite(options['level'], workers=workers, inject_fault=options['inject_fault'])
        failed = []
        for result in results:
            label = 'PASS' if result.passed else ('FAIL' if result.gating else 'MISS')
            line = f"[{label}] {result.name} ({result.seconds:.1f}s): {result.detail}"
            if result.passed:
                self.stdout.write(self.style.SUCCESS(line))
            else:
                self.stdout.write(self.style.WARNING(line) if not result.gating else self.style.ERROR(line))
            if result.gating and not result.passed:
                failed.append(result.name)
        if failed:
            raise CommandError(f"Verification failed: {', '.join(failed)}", returncode=EXIT_VERIFICATION)
        self.stdout.write(self.style.SUCCESS(f"All {len(results)} check(s) passed"))
