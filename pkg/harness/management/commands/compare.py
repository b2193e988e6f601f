from django.core.management.base import BaseCommand, CommandError

from harness.compare import run_compare
from harness.config import HELP_TEXT, default_config, parse_config
from harness.models import ComparisonRun
from harness.reports import write_outputs
from todalab.exceptions import LabError


class Command(BaseCommand):
    help = 'Compare the lattice simulation with the modulated wave and fit the error decay. ' + HELP_TEXT

    def add_arguments(self, parser):
        parser.add_argument('--config', help='key = value config file (default: a=1, b=-4 and all defaults)')
        parser.add_argument('--out', help='Output directory, overrides out_dir of the config')
        parser.add_argument('--no-record', action='store_true', help='Do not store the run in the database')

    def handle(self, *args, **options):
        try:
            config = parse_config(options['config']) if options['config'] else default_config()
            report = run_compare(config)
            out_dir = write_outputs(report, options['out'])
        except LabError as e:
            raise CommandError(str(e))

        for row in report.summary.itertuples(index=False):
            self.stdout.write(f"t = {row.t:<8g} max err b = {row.max_err_b:.3e}  max err a2sum = {row.max_err_a:.3e}")
        for name, fit in (('b', report.fit_b), ('a2sum', report.fit_a)):
            if fit is not None:
                self.stdout.write(f"slope {name}: {fit.slope:.4f} (residual {fit.residual:.2e})")
        self.stdout.write(f"pointwise decay: {report.pointwise_decay()}")

        if not options['no_record']:
            ComparisonRun.record(report, out_dir)

        if not report.passes:
            raise CommandError(f"acceptance checks failed, see {out_dir}")
        self.stdout.write(self.style.SUCCESS(f"All checks passed, reports in {out_dir}"))
