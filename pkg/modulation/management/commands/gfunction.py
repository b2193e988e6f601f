from django.core.management.base import BaseCommand, CommandError

from modulation.gfunction import g_data, signature_report, solve_whitham_edge
from spectral.spectral_map import BackgroundParams
from todalab.exceptions import LabError


class Command(BaseCommand):
    help = 'Solve the Whitham edge at a ray xi and report y, lambda_y, B and the sign table of Re g'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float, default=1.0)
        parser.add_argument('--b', type=float, default=-4.0)
        parser.add_argument('--xi', type=float, required=True)
        parser.add_argument('--grid', type=int, default=12, help='Radial and angular points of the sign table')
        parser.add_argument('--csv', help='Write the sign table (columns: re_z, im_z, sign_re_g)')

    def handle(self, *args, **options):
        try:
            params = BackgroundParams.from_ab(options['a'], options['b'])
            gdata = g_data(solve_whitham_edge(options['xi'], params))
        except LabError as e:
            raise CommandError(str(e))

        edge = gdata.edge
        self.stdout.write(f"y = {edge.y:.15g}")
        self.stdout.write(f"lambda_y = {edge.lambda_y:.15g}")
        self.stdout.write(f"B = {gdata.B:.15g}")

        if options['csv']:
            report = signature_report(gdata, radial=options['grid'], angular=options['grid'])
            report.frame[['re_z', 'im_z', 'sign_re_g']].to_csv(options['csv'], index=False, float_format='%.17g')
            for region, sign in zip(report.real_axis['region'], report.real_axis['sign_re_g']):
                self.stdout.write(f"{region:<16}{sign:+d}")
            self.stdout.write(self.style.SUCCESS(f"Wrote {options['csv']}"))
