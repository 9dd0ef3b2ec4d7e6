import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'tradeflow.settings')
django.setup()
