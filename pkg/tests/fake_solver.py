"""A stand-in solver process for protocol tests.

Answers the handshake echo, then reacts to (check-sat) according to the mode
given on the command line: hang, garbage, unknown or die.
"""
import sys
import time

mode = sys.argv[1]
for line in sys.stdin:
    line = line.strip()
    if line.startswith("(echo"):
        print(line.split('"')[1], flush=True)
    elif line == "(check-sat)":
        if mode == "hang":
            time.sleep(3600)
        elif mode == "garbage":
            print("banana", flush=True)
        elif mode == "unknown":
            print("unknown", flush=True)
        elif mode == "die":
            sys.exit(1)
    elif line.startswith("(get-info :reason-unknown"):
        print('(:reason-unknown "incomplete quantifiers")', flush=True)
    elif line == "(exit)":
        break
