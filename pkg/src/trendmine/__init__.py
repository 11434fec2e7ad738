"""Social-media sustainability trend mining: ingestion, multilingual text
preprocessing, country/topic filtering, hashed TF-IDF embeddings, lexicon
sentiment, density-based topic clustering, and OLS/LSTM trend forecasting."""

__version__ = "0.1.0"

from .config import PipelineConfig, load_config
from .corpus import Corpus, EngagementMetrics, Platform, RawPost, impute_missing, ingest, yearly_counts
from .errors import DataError, StageError, TrendmineError, UsageError
from .features import FeatureVector, VocabularyStats, embed_hashed_tfidf, fit_vocabulary, load_external_vectors
from .filtering import CountryFilterSpec, TopicLexicon, country_filter, sustainability_share, topic_filter
from .clustering import (ClusterModel, ClusterSummary, HdbscanParams, build_mst, condense_tree,
                         core_distances, extract_clusters, label_clusters, mutual_reachability,
                         run_hdbscan)
from .sentiment import (EvalSplit, SentimentLexicon, SentimentResult, evaluate,
                        load_external_scores, make_split, score_lexicon, sentiment_distribution)
from .textprep import (CleanPost, LemmaTable, PrepConfig, StopWordList, filter_stopwords,
                       lemmatize, ngrams, normalize, preprocess, remove_noise, tokenize)
from .stemming import stem
from .trends import (Forecast, OlsFit, TrendSeries, build_series, fit_ols, forecast_lstm,
                     forecast_ols, forecast_series)
from .lstm import LstmConfig, LstmModel, lstm_gradient_check, train_lstm
from .report import RunReport, run_pipeline
from .synthcorpus import SynthSpec, generate
