//! Desk-scale steganalysis: Gabor residuals, pooled features, linear detector.

pub mod detector;
pub mod features;
pub mod gabor;

pub use detector::{detection_error, train_eval_detector, DetectionReport, DetectorParams};
pub use features::{extract_features, FeatureParams};
pub use gabor::{gabor_bank, gabor_kernel, tlu, GaborParams, Kernel};
