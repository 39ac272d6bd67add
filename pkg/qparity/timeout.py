import contextlib
import signal


class GuardRefused(Exception):
    pass


class TimeoutError(GuardRefused):
    pass


def guard(size, limit, what):
    """Refuses work whose ``size`` exceeds ``limit``."""
    if size > limit:
        raise GuardRefused('%s: %d exceeds the limit of %d' % (what, size, limit))


@contextlib.contextmanager
def timeout(time=30):
    def _fail(signal, frame):
        raise TimeoutError("%s second time limit expired" % time)

    previous = signal.signal(signal.SIGALRM, _fail)
    signal.alarm(time)
    try:
        yield
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, previous)
