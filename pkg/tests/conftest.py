import os
import tempfile

# Keep symbol tables out of the user cache; one directory per test session
# so repeated runs still exercise the disk-cache write path.
_cache = tempfile.mkdtemp(prefix="fracharm-test-cache-")
os.environ.setdefault("FRACHARM_CACHE_DIR", _cache)
