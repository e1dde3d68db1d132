from _eagl import *  # noqa: F401,F403
