import pandas as pd
from django.core.management.base import BaseCommand, CommandError

from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import LabError


class Command(BaseCommand):
    help = 'Print the four critical rays of the step-like background (a, b)'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float, default=1.0)
        parser.add_argument('--b', type=float, default=-4.0)
        parser.add_argument('--csv', help='Also write the table to this CSV file (columns: name, value)')

    def handle(self, *args, **options):
        try:
            params = BackgroundParams.from_ab(options['a'], options['b'])
            rows = critical_rays(params).as_rows()
        except LabError as e:
            raise CommandError(str(e))

        self.stdout.write(f"q = {params.q:.15g}, q1 = {params.q1:.15g}")
        for name, value in rows:
            self.stdout.write(f"{name:<14}{value:.15g}")
        if options['csv']:
            pd.DataFrame(rows, columns=['name', 'value']).to_csv(options['csv'], index=False, float_format='%.17g')
            self.stdout.write(self.style.SUCCESS(f"Wrote {options['csv']}"))
