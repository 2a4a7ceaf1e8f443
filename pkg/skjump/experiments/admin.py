from django.contrib import admin


class ExperimentRunAdmin(admin.ModelAdmin):
    """Admin interface for ExperimentRun.

    Runs are written by the `run` command only, so every field is read only.

    References:
        * https://docs.djangoproject.com/en/4.2/ref/contrib/admin/#modeladmin-options

    """

    list_display = ('experiment', 'model', 'status', 'aborts', 'seed',
                    'config_hash', 'created_date')
    list_filter = ('experiment', 'status')
    search_fields = ('config_hash', 'model', 'out_dir')
    readonly_fields = ('experiment', 'model', 'config_hash', 'seed', 'aborts',
                       'out_dir', 'status', 'manifest', 'created_date')

