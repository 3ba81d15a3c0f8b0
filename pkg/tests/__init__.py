import pytest

pytest.importorskip('django')


# Setup a Django environment, before we do anything else.
#
# The configuration layer reads the Django settings, and the
# management command needs the app registry.

from django.apps import apps
from django.conf import settings

if not settings.configured:
    settings.configure(INSTALLED_APPS=['prunetree'])
apps.populate(settings.INSTALLED_APPS)
