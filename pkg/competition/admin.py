"""Admin registration for stored runs."""

from django.contrib import admin

from .models import ExperimentRun, ReplicaResult


class ReplicaResultInline(admin.TabularInline):
    model = ReplicaResult
    extra = 0
    can_delete = False
    fields = ('index', 'n', 'n1', 'n2', 'frac1', 'frac2', 'sup_deviation', 'qv', 'termination_step')
    readonly_fields = fields


class ExperimentRunAdmin(admin.ModelAdmin):
    """Stored runs, filterable by kind and status, with their replica rows inline."""
    list_display = ('id', 'kind', 'seed', 'status', 'created_at')
    list_filter = ('kind', 'status')
    readonly_fields = ('created_at',)
    inlines = [ReplicaResultInline]


admin.site.register(ExperimentRun, ExperimentRunAdmin)
