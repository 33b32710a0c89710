# Test wiring for pytest: configure Django exactly as runtests.py does.
import django
from django.conf import settings

collect_ignore = ["setup.py", "runtests.py", "docs"]

if not settings.configured:
    settings.configure(
        DATABASES={},
        INSTALLED_APPS=(
            "sbp",
            "tests",
        ),
        SECRET_KEY="super-secret",
        SBP={},
    )
    django.setup()
