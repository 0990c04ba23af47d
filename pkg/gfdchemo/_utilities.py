#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Small helpers shared across gfdchemo: the scalar/array calling convention for
model functions and the attribute-access dictionary used for run
configurations.
"""
from functools import wraps

import numpy as np


def match_args_return(f):
    """
    Decorator for functions of scalar variables (s, x, y, ...).

    Arguments are coerced to float arrays before the call.  When every
    argument was a scalar, array results are returned as Python floats;
    tuple results are fixed up element-wise.
    """
    @wraps(f)
    def wrapper(*args, **kw):
        isarray = np.any([hasattr(a, '__iter__') for a in args])
        newargs = [np.asarray(a, dtype=float) for a in args]

        def fixup(ret):
            if not isarray and isinstance(ret, np.ndarray):
                ret = float(ret.reshape(-1)[0])
            return ret

        ret = f(*newargs, **kw)
        if isinstance(ret, tuple):
            ret = tuple(fixup(r) for r in ret)
        else:
            ret = fixup(ret)
        return ret
    wrapper.__wrapped__ = f
    return wrapper


class Bunch(dict):
    """
    A dictionary that also provides access via attributes.

    update_values() adds nothing new by default; with strict=True an
    attempt to set a key that is not already present raises KeyError.

    The Bunch prints with str() of its keys and values in key-sorted order;
    use formatted() for a custom layout.
    """

    str_fmt = "{0!s:<{klen}} : {1!s:>{vlen}}\n"

    def __init__(self, *args, **kwargs):
        dict.__init__(self)
        for arg in args:
            self.update(arg)
        self.update(kwargs)

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError("'%s' object has no attribute '%s'"
                                 % (type(self).__name__, name))

    def __setattr__(self, name, value):
        self[name] = value

    def __str__(self):
        return self.formatted()

    def formatted(self, fmt=None):
        """
        Return a string with one "key : value" line per entry.

        The format string receives key and value positionally and klen,
        vlen as keywords: the longest key and value lengths, capped at 20
        and 40.
        """
        if fmt is None:
            fmt = self.str_fmt
        items = sorted(self.items())
        if not items:
            return ''
        klen = min(20, max(len(str(k)) for k, _ in items))
        vlen = min(40, max(len(str(v)) for _, v in items))
        return ''.join(fmt.format(k, v, klen=klen, vlen=vlen)
                       for k, v in items)

    def update_values(self, *args, **kw):
        """
        Update existing keys from dictionary-like arguments and kwargs,
        the kwargs taking precedence.  Keys not already present are ignored,
        or rejected with KeyError when strict=True is passed.
        """
        strict = kw.pop("strict", False)
        newkw = dict()
        for d in args:
            newkw.update(d)
        newkw.update(kw)
        self._check_strict(strict, newkw)
        self.update({k: v for k, v in newkw.items() if k in self})

    def _check_strict(self, strict, kw):
        if strict:
            bad = sorted(set(kw.keys()) - set(self.keys()))
            if bad:
                raise KeyError(bad[0])
