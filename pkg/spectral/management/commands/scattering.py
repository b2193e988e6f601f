import numpy as np
import pandas as pd
from django.core.management.base import BaseCommand, CommandError

from spectral.scattering import StepData, load_window, scattering_summary
from spectral.spectral_map import BackgroundParams
from todalab.exceptions import LabError


class Command(BaseCommand):
    help = 'Wronskian at the band edges, resonance flags and eigenvalues of the step data'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float, default=1.0)
        parser.add_argument('--b', type=float, default=-4.0)
        parser.add_argument('--window', help='CSV file (columns n, a, b) perturbing the pure step')
        parser.add_argument('--csv', help='Write chi on a grid of the left band (columns: z, im_chi)')
        parser.add_argument('--points', type=int, default=200)

    def handle(self, *args, **options):
        try:
            params = BackgroundParams.from_ab(options['a'], options['b'])
            data = load_window(options['window'], params) if options['window'] else StepData.pure_step(params)
            summary = scattering_summary(data)
        except LabError as e:
            raise CommandError(str(e))

        for name, modulus in summary.resonance.moduli.items():
            flag = 'resonant' if summary.resonance.flags[name] else 'non-resonant'
            self.stdout.write(f"|W({name})| = {modulus:.6e}  {flag}")
        self.stdout.write(f"eigenvalues: {list(summary.eigenvalues) or 'none'}")

        if options['csv']:
            z = np.linspace(params.q1, params.q, options['points'] + 2)[1:-1]
            frame = pd.DataFrame({'z': z, 'im_chi': np.imag(summary.chi(z))})
            frame.to_csv(options['csv'], index=False, float_format='%.17g')
            self.stdout.write(self.style.SUCCESS(f"Wrote {options['csv']}"))
