"""groundsim: interactive visual-concept grounding via dialogue.

A learner agent acquires fine-grained object categories from a teacher's
labels and generic statements, combining exemplar-based perception scores
with weighted logic-program inference and the implicatures of contrastive
answers.
"""

__version__ = "0.1.0"
