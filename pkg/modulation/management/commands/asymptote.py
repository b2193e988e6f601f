import pandas as pd
from django.core.management.base import BaseCommand, CommandError

from modulation.asymptotics import modulated_wave
from spectral.scattering import StepData, load_window, scattering_summary
from spectral.spectral_map import BackgroundParams
from todalab.exceptions import LabError


class Command(BaseCommand):
    help = 'Leading-order modulated wave b_hat, a2sum_hat at sites n_lo..n_hi and time t'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float, default=1.0)
        parser.add_argument('--b', type=float, default=-4.0)
        parser.add_argument('--t', type=float, required=True)
        parser.add_argument('--n-range', type=int, nargs=2, required=True, metavar=('N_LO', 'N_HI'))
        parser.add_argument('--window', help='CSV file (columns n, a, b) perturbing the pure step')
        parser.add_argument('--epsilon', type=float, help='Margin inside the modulation window')
        parser.add_argument('--out', default='asymptote.csv')

    def handle(self, *args, **options):
        n_lo, n_hi = options['n_range']
        if n_hi < n_lo or options['t'] <= 0:
            raise CommandError("need N_LO <= N_HI and t > 0")
        try:
            params = BackgroundParams.from_ab(options['a'], options['b'])
            data = load_window(options['window'], params) if options['window'] else StepData.pure_step(params)
            summary = scattering_summary(data)
            waves = [modulated_wave(n, options['t'], summary, options['epsilon']) for n in range(n_lo, n_hi + 1)]
        except LabError as e:
            raise CommandError(str(e))

        frame = pd.DataFrame([{
            'n': wave.n, 't': wave.t, 'xi': wave.xi, 'lambda_nt': wave.lambda_nt,
            'b_hat': wave.b_hat, 'a2sum_hat': wave.a_hat_sq_sum,
        } for wave in waves])
        frame.to_csv(options['out'], index=False, float_format='%.17g')
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(frame)} sites to {options['out']}"))
