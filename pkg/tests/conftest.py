from hypothesis import settings

# fixed example sequence so runs are reproducible; some checks are exhaustive and slow
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")
