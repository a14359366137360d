//! Project data: CSV records, the repository filter, the synthetic
//! generator, and weight/matrix configuration files.

pub mod records;
pub mod synth;
pub mod tables;

pub use records::{
    csv_header, filter_isbsg, load_csv, passes_isbsg_filter, read_csv, save_csv, write_csv,
    LoadOutcome, ProjectRecord, QualityRating, RejectedRow, GSC_COUNT,
};
pub use synth::{perturbed_weights, synthesize, SynthConfig};
pub use tables::{
    load_components, load_matrices, load_weights, read_components, read_matrices, read_weights,
    save_matrices, save_weights, write_matrices, write_weights,
};
