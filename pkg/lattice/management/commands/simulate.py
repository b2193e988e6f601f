from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from lattice.simulator import TodaIntegrator, init_steplike, snapshot_frame
from spectral.scattering import StepData, load_window
from spectral.spectral_map import BackgroundParams
from todalab.exceptions import LabError
from todalab.quadrature import lab_setting


class Command(BaseCommand):
    help = 'Integrate the Toda lattice from step-like data and write (n, a, b) snapshots'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float, default=1.0)
        parser.add_argument('--b', type=float, default=-4.0)
        parser.add_argument('--t', type=float, required=True)
        parser.add_argument('--dt', type=float, default=None)
        parser.add_argument('--pad', type=float, default=None)
        parser.add_argument('--snapshot-every', type=float, default=None,
                            help='Snapshot interval; only the final state when omitted')
        parser.add_argument('--window', help='CSV file (columns n, a, b) perturbing the pure step')
        parser.add_argument('--out', default=lab_setting('OUTPUT_DIR'))

    def handle(self, *args, **options):
        t_final = options['t']
        if t_final <= 0:
            raise CommandError("t must be positive")
        every = options['snapshot_every'] or t_final
        times = []
        k = 1
        while k * every < t_final:
            times.append(k * every)
            k += 1
        times.append(t_final)

        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        try:
            params = BackgroundParams.from_ab(options['a'], options['b'])
            data = load_window(options['window'], params) if options['window'] else StepData.pure_step(params)
            state = init_steplike(params, t_final, pad=options['pad'], data=data)
            integrator = TodaIntegrator(options['dt'])
            snapshots = []
            for t in times:
                integrator.evolve_to(state, t)
                name = f"snapshot_t{t:g}.csv"
                snapshot_frame(state).to_csv(out / name, index=False, float_format='%.17g')
                snapshots.append(name)
                self.stdout.write(f"t = {t:g} -> {name}")
        except LabError as e:
            raise CommandError(str(e))

        manifest = [
            f"a={params.a:.17g}",
            f"b={params.b:.17g}",
            f"dt={integrator.dt:.17g}",
            f"t_final={t_final:.17g}",
            f"n_min={state.n_min}",
            f"n_max={state.n_max}",
            f"snapshots={','.join(snapshots)}",
        ]
        (out / 'manifest.txt').write_text('\n'.join(manifest) + '\n')
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(snapshots)} snapshot(s) to {out}"))
