try:
    from ._gsmix import *  # noqa: F401,F403
    from ._gsmix import __doc__  # noqa: F401
except ImportError:  # module built in-tree, not installed as a package
    from _gsmix import *  # noqa: F401,F403
