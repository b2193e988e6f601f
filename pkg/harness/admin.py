from django.contrib import admin
from .models import ComparisonRun

@admin.register(ComparisonRun)
class ComparisonRunAdmin(admin.ModelAdmin):
    list_display = ('a', 'b', 'epsilon', 'dt', 'slope_b', 'slope_a', 'passed', 'created_at')
    list_filter = ('passed', 'pointwise_decay', 'created_at')
    search_fields = ('out_dir',)
    readonly_fields = ('created_at',)
    ordering = ('-created_at',)
