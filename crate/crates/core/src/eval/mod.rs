//! Evaluation of composed embeddings: clustering against section labels,
//! alignment retrieval and drift diagnostics.

mod drift;
mod kmeans;
mod partition;
mod report;
mod retrieval;
mod space;
mod triplets;

pub use drift::{
    average_representation, cosine_similarity_report, distance_histogram, track_neighbors, DistanceHistograms,
    NeighborTrack, SliceHistogram, SliceNeighbors, StabilityEntry, StabilityReport, Trajectory, STABLE_COSINE,
};
pub use kmeans::{spherical_kmeans, ClusterAssignment};
pub use partition::{f_beta, f_beta_keyed, nmi, nmi_keyed, FBetaScore};
pub use report::{cdf_csv, histogram_csv, read_reports, track_csv, write_reports, MetricReport};
pub use retrieval::{
    identity_baseline, mp_at_k, mrr, nearest_neighbors, read_alignment, write_alignment, AlignmentRelation,
    AlignmentScore, Neighbor, RetrievalOptions, MRR_DEPTH,
};
pub use space::{ComposedEmbeddings, SliceSpace};
pub use triplets::{
    build_triplets, evaluate_clustering, read_annotations, read_triplets, write_triplets, ClusteringOptions,
    ClusteringOutcome, PopularityScope, SectionCount, Triplet, TripletOptions,
};
