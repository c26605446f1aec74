"""hatecast: forecast how hateful branching comment-tree discussions become.

Pipeline stages (each also a CLI subcommand): ingest or synthesize discussion
trees, featurize comments, compute recursive hate labels, trim to the
prediction view, encode structure, then train and evaluate a full-context
graph transformer against a neighbourhood-limited GAT baseline.
"""

__version__ = "0.1.0"
