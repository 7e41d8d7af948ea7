"""Priority evacuation of a queen with servants from the unit disk.

Build the search algorithms, compute their exact worst-case evacuation
time, tune their parameters, and solve the matching lower bounds.
"""

__version__ = "0.1.0"
