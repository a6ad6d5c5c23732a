"""gaap: a guarded execution environment for LLM agent scripts.

Agent code artifacts run in a closed mini-language under dynamic taint
tracking; every disclosure of private data to an external party is checked
against the user's persisted permission specifications before the call is
emitted, and every authorized disclosure is logged for transitive tracking
across tasks.
"""

__version__ = "0.1.0"
