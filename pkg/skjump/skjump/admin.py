from django.contrib.admin import sites
from django.contrib.auth.models import Group, User

from experiments.admin import ExperimentRunAdmin
from experiments.models import ExperimentRun


class SkjumpAdmin(sites.AdminSite):
    """Admin Site with customized header and title bar.

    References:

        * https://docs.djangoproject.com/en/4.2/ref/contrib/admin/#customizing-the-adminsite-class

    """
    site_header = 'skjump Run Registry'
    site_title = 'skjump Administration'


skjump_admin_site = SkjumpAdmin(name='admin')

skjump_admin_site.register(User)
skjump_admin_site.register(Group)
skjump_admin_site.register(ExperimentRun, ExperimentRunAdmin)
