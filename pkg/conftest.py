from hypothesis import settings

# no per-example deadline
settings.register_profile("persuasion", deadline=None)
settings.load_profile("persuasion")
