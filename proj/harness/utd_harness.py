# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The utdebug Authors
"""Single-shot execution harness.

Reads one JSON request on stdin, runs the candidate's entry point on the
evaluated argument literals and writes exactly one JSON response line on
stdout. Everything else the candidate prints is discarded.
"""

import builtins
import json
import math
import os
import shutil
import signal
import sys
import tempfile
import threading
import time

MAX_MSG = 2048
MAX_DEPTH = 50
STATUSES = ("ok", "exception", "timeout", "load_error", "arg_error")
WATCHDOG_GRACE_S = 0.2

_out_fd = None
_emit_lock = threading.Lock()
_emitted = False
_start = time.monotonic()
_real_exit = os._exit


class _Timeout(BaseException):
    pass


class _CanonDepth(Exception):
    pass


def _truncate(text):
    data = text.encode("utf-8", "replace")
    if len(data) <= MAX_MSG:
        return text
    return data[:MAX_MSG].decode("utf-8", "ignore")


# ---------------------------------------------------------------- canonical form

def _float_text(x):
    if math.isnan(x):
        return "float('nan')"
    if math.isinf(x):
        return "float('inf')" if x > 0 else "float('-inf')"
    return repr(x)


def canonicalize(value, depth=0):
    if depth > MAX_DEPTH:
        raise _CanonDepth("canonicalization depth exceeded")
    d = depth + 1
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, int):
        return int.__repr__(value)
    if isinstance(value, float):
        return _float_text(value)
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, str):
        return str.__repr__(value)
    if isinstance(value, (bytes, bytearray)):
        return repr(bytes(value))
    if isinstance(value, list):
        return "[" + ", ".join(canonicalize(v, d) for v in value) + "]"
    if isinstance(value, tuple):
        items = [canonicalize(v, d) for v in value]
        if len(items) == 1:
            return "(" + items[0] + ",)"
        return "(" + ", ".join(items) + ")"
    if isinstance(value, (set, frozenset)):
        items = sorted(canonicalize(v, d) for v in value)
        body = "{" + ", ".join(items) + "}"
        if isinstance(value, frozenset):
            return "frozenset(" + (body if items else "") + ")"
        return body if items else "set()"
    if isinstance(value, dict):
        pairs = sorted((canonicalize(k, d), canonicalize(v, d)) for k, v in value.items())
        return "{" + ", ".join(k + ": " + v for k, v in pairs) + "}"
    if isinstance(value, range):
        return repr(value)
    return "<" + type(value).__name__ + ">"


# ---------------------------------------------------------------- equality

def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def judge_equal(actual, expected, abs_tol, rel_tol, depth=0):
    if depth > MAX_DEPTH:
        raise _CanonDepth("comparison depth exceeded")
    d = depth + 1
    if isinstance(actual, bool) or isinstance(expected, bool):
        return isinstance(actual, bool) and isinstance(expected, bool) and actual == expected
    if _is_number(actual) and _is_number(expected):
        if isinstance(actual, int) and isinstance(expected, int):
            return actual == expected
        a, b = float(actual), float(expected)
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        if math.isinf(a) or math.isinf(b):
            return a == b
        return abs(a - b) <= max(abs_tol, rel_tol * max(abs(a), abs(b)))
    if isinstance(actual, (list, tuple)) and isinstance(expected, (list, tuple)):
        if len(actual) != len(expected):
            return False
        return all(judge_equal(x, y, abs_tol, rel_tol, d) for x, y in zip(actual, expected))
    if isinstance(actual, (set, frozenset)) and isinstance(expected, (set, frozenset)):
        return _unordered_equal(list(actual), list(expected), abs_tol, rel_tol, d)
    if isinstance(actual, dict) and isinstance(expected, dict):
        if len(actual) != len(expected):
            return False
        a_items = list(actual.items())
        b_items = list(expected.items())
        used = [False] * len(b_items)
        for ka, va in a_items:
            hit = False
            for i, (kb, vb) in enumerate(b_items):
                if used[i]:
                    continue
                if judge_equal(ka, kb, abs_tol, rel_tol, d) and judge_equal(va, vb, abs_tol, rel_tol, d):
                    used[i] = True
                    hit = True
                    break
            if not hit:
                return False
        return True
    containers = (list, tuple, set, frozenset, dict, str, bytes, bytearray)
    if isinstance(actual, containers) or isinstance(expected, containers):
        if type(actual) is not type(expected):
            if not (isinstance(actual, (bytes, bytearray)) and isinstance(expected, (bytes, bytearray))):
                return False
    return bool(actual == expected)


def _unordered_equal(a, b, abs_tol, rel_tol, depth):
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for x in a:
        for i, y in enumerate(b):
            if not used[i] and judge_equal(x, y, abs_tol, rel_tol, depth):
                used[i] = True
                break
        else:
            return False
    return True


# ---------------------------------------------------------------- confinement

def _confine(workdir):
    import socket

    def _blocked(*_a, **_k):
        raise PermissionError("blocked by harness")

    class _NoSocket(socket.socket):
        def __init__(self, *a, **k):
            raise PermissionError("network access blocked by harness")

    socket.socket = _NoSocket
    socket.create_connection = _blocked
    for name in ("system", "popen", "fork", "forkpty", "execv", "execve", "execvp",
                 "execvpe", "execl", "execle", "execlp", "execlpe", "spawnv", "spawnve",
                 "spawnl", "spawnle", "kill", "killpg", "_exit", "abort", "chdir",
                 "fchdir", "chroot", "setuid", "setgid"):
        if hasattr(os, name):
            setattr(os, name, _blocked)
    try:
        import subprocess
        subprocess.Popen = _blocked
        subprocess.run = _blocked
        subprocess.call = _blocked
        subprocess.check_call = _blocked
        subprocess.check_output = _blocked
    except Exception:
        pass

    real_open = builtins.open
    root = os.path.realpath(workdir)

    def _open(file, mode="r", *args, **kwargs):
        if isinstance(file, (str, bytes, os.PathLike)) and any(c in mode for c in "wax+"):
            path = os.path.realpath(os.fsdecode(file))
            if not (path == root or path.startswith(root + os.sep)):
                raise PermissionError("write outside the harness working directory")
        return real_open(file, mode, *args, **kwargs)

    builtins.open = _open
    try:
        import resource
        limit = 2 * 1024 * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    except Exception:
        pass


# ---------------------------------------------------------------- request handling

def _literal_env():
    return {"__builtins__": builtins}


def handle(request):
    mode = request.get("mode")
    code = request.get("code")
    entry = request.get("entry_point")
    args_expr = request.get("args_expr", [])
    expected_expr = request.get("expected_expr")
    timeout_ms = request.get("timeout_ms", 5000)
    abs_tol = float(request.get("float_abs_tol", 1e-6))
    rel_tol = float(request.get("float_rel_tol", 1e-6))
    if (mode not in ("call", "check") or not isinstance(code, str) or not isinstance(entry, str)
            or not isinstance(args_expr, list) or not all(isinstance(a, str) for a in args_expr)
            or not isinstance(timeout_ms, int) or isinstance(timeout_ms, bool) or timeout_ms <= 0
            or (mode == "check" and not isinstance(expected_expr, str))):
        return {"status": "arg_error", "error_type": "bad_request",
                "error_msg": "malformed harness request"}

    def _on_alarm(_sig, _frame):
        raise _Timeout()

    signal.signal(signal.SIGALRM, _on_alarm)
    signal.setitimer(signal.ITIMER_REAL, timeout_ms / 1000.0)
    _start_watchdog(timeout_ms)
    try:
        return _run(mode, code, entry, args_expr, expected_expr, abs_tol, rel_tol)
    except _Timeout:
        return {"status": "timeout", "error_type": "timeout",
                "error_msg": "exceeded %d ms" % timeout_ms}
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)


def _emit(response):
    global _emitted
    with _emit_lock:
        if _emitted:
            return
        _emitted = True
        response["duration_ms"] = int((time.monotonic() - _start) * 1000)
        data = (json.dumps(response, ensure_ascii=True) + "\n").encode("ascii")
        while data:
            n = os.write(_out_fd, data)
            data = data[n:]


def _start_watchdog(timeout_ms):
    # Candidate code can swallow the alarm exception; this thread answers
    # for it and ends the process.
    def _fire():
        _emit({"status": "timeout", "error_type": "timeout",
               "error_msg": "exceeded %d ms" % timeout_ms})
        _real_exit(0)

    t = threading.Timer(timeout_ms / 1000.0 + WATCHDOG_GRACE_S, _fire)
    t.daemon = True
    t.start()


def _error(status, exc):
    return {"status": status, "error_type": type(exc).__name__, "error_msg": _truncate(str(exc))}


def _run(mode, code, entry, args_expr, expected_expr, abs_tol, rel_tol):
    module = {"__name__": "candidate", "__builtins__": builtins}
    try:
        exec(compile(code, "<candidate>", "exec"), module)
    except _Timeout:
        raise
    except BaseException as exc:  # SyntaxError, SystemExit, ...
        return _error("load_error", exc)
    fn = module.get(entry)
    if not callable(fn):
        return {"status": "load_error", "error_type": "missing_entry_point",
                "error_msg": _truncate("entry point %r not defined" % entry)}
    try:
        args = [eval(expr, _literal_env()) for expr in args_expr]
        expected = eval(expected_expr, _literal_env()) if mode == "check" else None
    except _Timeout:
        raise
    except BaseException as exc:
        return _error("arg_error", exc)
    try:
        value = fn(*args)
    except _Timeout:
        raise
    except BaseException as exc:
        return _error("exception", exc)
    try:
        text = canonicalize(value)
    except _CanonDepth as exc:
        return {"status": "exception", "error_type": "canon_depth", "error_msg": _truncate(str(exc))}
    except RecursionError:
        return {"status": "exception", "error_type": "canon_depth",
                "error_msg": "canonicalization depth exceeded"}
    resp = {"status": "ok", "value_canon": text}
    if mode == "check":
        try:
            resp["equal"] = bool(judge_equal(value, expected, abs_tol, rel_tol))
        except _Timeout:
            raise
        except BaseException as exc:
            resp["equal"] = False
            resp["error_type"] = type(exc).__name__
            resp["error_msg"] = _truncate(str(exc))
    return resp


def main():
    global _out_fd
    _out_fd = os.dup(1)
    devnull = os.open(os.devnull, os.O_WRONLY)
    os.dup2(devnull, 1)
    sys.stdout = open(os.devnull, "w")
    try:
        request = json.loads(sys.stdin.read())
        if not isinstance(request, dict):
            raise ValueError("request is not an object")
    except Exception as exc:
        response = {"status": "arg_error", "error_type": "bad_request", "error_msg": _truncate(str(exc))}
    else:
        workdir = tempfile.mkdtemp(prefix="utd-")
        os.chdir(workdir)
        sys.setrecursionlimit(3000)
        _confine(workdir)
        try:
            response = handle(request)
        except BaseException as exc:
            response = _error("exception", exc)
        shutil.rmtree(workdir, ignore_errors=True)
    _emit(response)
    sys.stderr.flush()


if __name__ == "__main__":
    main()
    _real_exit(0)
