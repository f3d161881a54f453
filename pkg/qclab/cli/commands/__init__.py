from . import demo, identities, run

__all__ = ['run', 'identities', 'demo']
