import logging

from django.http import JsonResponse
from django.views.decorators.http import require_http_methods

from spectral.spectral_map import BackgroundParams, critical_rays
from todalab.exceptions import LabError
from todalab.quadrature import lab_setting
from .models import ComparisonRun

logger = logging.getLogger(__name__)


@require_http_methods(["GET"])
def run_list(request):
    """Most recent comparison runs, newest first"""
    runs = ComparisonRun.objects.all()[:50]
    return JsonResponse({'success': True, 'runs': [run.as_dict() for run in runs]})


@require_http_methods(["GET"])
def run_detail(request, run_id):
    try:
        run = ComparisonRun.objects.get(pk=run_id)
    except ComparisonRun.DoesNotExist:
        return JsonResponse({'success': False, 'error': f'Run {run_id} not found'}, status=404)
    return JsonResponse({'success': True, 'run': run.as_dict()})


@require_http_methods(["GET"])
def critical_values(request):
    """Critical rays and modulation window for ?a=&b= (defaults a=1, b=-4)"""
    try:
        a = float(request.GET.get('a', 1.0))
        b = float(request.GET.get('b', -4.0))
        epsilon = float(request.GET.get('epsilon', lab_setting('COMPARE_EPSILON')))
    except ValueError:
        return JsonResponse({'success': False, 'error': 'a, b and epsilon must be numbers'}, status=400)

    try:
        params = BackgroundParams.from_ab(a, b)
        rays = critical_rays(params)
    except LabError as e:
        logger.warning(f"Critical values request rejected: {e}")
        return JsonResponse({'success': False, 'error': str(e)}, status=400)

    lo, hi = rays.modulation_window(epsilon)
    return JsonResponse({
        'success': True,
        'params': {'a': a, 'b': b, 'q': params.q, 'q1': params.q1},
        'rays': dict(rays.as_rows()),
        'window': [lo, hi],
    })
