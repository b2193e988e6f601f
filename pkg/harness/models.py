from django.db import models


class ComparisonRun(models.Model):
    """One `compare` invocation: config, fitted decay rates and the per-t error summary."""
    a = models.FloatField()
    b = models.FloatField()
    epsilon = models.FloatField()
    dt = models.FloatField()
    t_list = models.JSONField(default=list)
    xi_grid = models.JSONField(default=list)
    slope_b = models.FloatField(null=True, blank=True)
    slope_a = models.FloatField(null=True, blank=True)
    residual_b = models.FloatField(null=True, blank=True)
    residual_a = models.FloatField(null=True, blank=True)
    pointwise_decay = models.BooleanField(default=False)
    passed = models.BooleanField(default=False)
    summary = models.JSONField(default=list, blank=True)
    out_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        status = 'pass' if self.passed else 'fail'
        return f"a={self.a:g}, b={self.b:g} ({len(self.xi_grid)} rays, {status})"

    @classmethod
    def record(cls, report, out_dir=''):
        config = report.config
        fit_b, fit_a = report.fit_b, report.fit_a
        return cls.objects.create(
            a=config.params.a,
            b=config.params.b,
            epsilon=config.epsilon,
            dt=config.dt,
            t_list=list(config.t_list),
            xi_grid=list(config.xi_grid),
            slope_b=fit_b.slope if fit_b else None,
            slope_a=fit_a.slope if fit_a else None,
            residual_b=fit_b.residual if fit_b else None,
            residual_a=fit_a.residual if fit_a else None,
            pointwise_decay=report.pointwise_decay(),
            passed=report.passes,
            summary=report.summary.to_dict(orient='records'),
            out_dir=str(out_dir),
        )

    def as_dict(self):
        return {
            'id': self.id,
            'a': self.a,
            'b': self.b,
            'epsilon': self.epsilon,
            'dt': self.dt,
            't_list': self.t_list,
            'xi_grid': self.xi_grid,
            'slope_b': self.slope_b,
            'slope_a': self.slope_a,
            'residual_b': self.residual_b,
            'residual_a': self.residual_a,
            'pointwise_decay': self.pointwise_decay,
            'passed': self.passed,
            'summary': self.summary,
            'out_dir': self.out_dir,
            'created_at': self.created_at.isoformat(),
        }
