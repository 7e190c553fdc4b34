"""Word-level language identification for Romanized Hindi-English text.

Character n-gram featurization, three feature-selection algorithms
(chi-square top-k, greedy forward selection, recursive feature
elimination), three from-scratch classifiers (multinomial naive Bayes,
multinomial logistic regression, decision tree), and an experiment grid
that sweeps accuracy against the number of selected features.
"""

from .corpus import (
    ConflictingLabelError,
    CorpusStats,
    LabeledWord,
    ParseError,
    RawTweet,
    Tag,
    build_labeled_corpus,
    load_annotated_tsv,
    load_raw_tweets,
    load_stopwords,
    preprocess_tweet,
)
from .ngrams import (
    FeatureMatrix,
    NGramSpec,
    Vocabulary,
    build_vocabulary,
    extract_ngrams,
    featurize,
    project_columns,
)
from .classifiers import ClassifierKind, ClassifierSpec, accuracy, predict, train
from .selection import (
    SelectionMethod,
    SelectionResult,
    SelectorConfig,
    chi_square_scores,
    forward_select,
    recursive_eliminate,
    recursive_eliminate_cv,
    select_top_k,
    wrapper_objective,
)
from .evaluation import ExperimentRecord, SplitKind, SplitPlan, run_grid, stratified_holdout

__version__ = "0.1.0"
