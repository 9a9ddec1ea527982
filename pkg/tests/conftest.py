import sys

# deep solver recursion holds many suspended generator frames
sys.setrecursionlimit(100_000)
