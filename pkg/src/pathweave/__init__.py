"""pathweave: self-structuring topic pathways, events and emotions from a
timestamped short-text stream.

The pipeline samples a stream into fixed-interval batches, learns a growing
map per live topic pathway on each batch, chains the generalised cluster
representations into pathways, flags events from volume and sentiment shifts
against trailing averages, and scores every message on a 16-category emotion
model.
"""

from .corpus import (Batch, IngestResult, Message, PreprocessConfig,
                     SparseVector, Vocabulary, build_vocabulary,
                     build_vocabulary_from_tokens, dedupe, default_stopwords,
                     ingest, ingest_path, load_stopwords, partition,
                     preprocess, similarity, vectorize)
from .emotion import (CATEGORIES, NEGATIVE_CATEGORIES, POSITIVE_CATEGORIES,
                      EmbeddingTable, EmotionLexicon, EmotionVector,
                      LexiconError, ModifierLexicon, SentimentScore,
                      TimelineBin, default_lexicons, emotion_timeline,
                      expand_lexicon, load_embeddings, load_lexicon,
                      merge_units, score_post, sentiment_of)
from .engine import (ConfigError, EngineConfig, EngineState, StateError,
                     StreamEngine, coherence_report, event_report, load_config,
                     load_state, save_state, segment_report)
from .events import (EventConfig, EventRecord, IndicatorWeights, detect,
                     event_score, indicator_sentiment, indicator_volume)
from .gsom import (GsomMap, GsomNode, GsomParams, find_winner, grow, init_map,
                   train, train_step)
from .metrics import CoherenceInput, coherence, collect_frequencies
from .pathways import (BatchFeatures, ClusterRep, LayerResult, LayerState,
                       PathwayConfig, TopicPathway, TopicSegment,
                       advance_layer, generalize, route)

__version__ = "0.1.0"
