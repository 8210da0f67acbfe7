//! Liouville fields `phi = -2 log|chi|` built from real-monodromy equations,
//! their residuals and cusp asymptotics, and the singular contours `chi = 0`.

mod contours;
mod export;
mod field;

pub use contours::{
    classify_solution, expected_contours, extract_contours, extract_contours_auto, refine_to_contour,
    schwarz_singularity_check, sign_flips_across, winding_number, Classification, Contour, SchwarzLocalModel,
    SchwarzReport, SchwarzSample, SolutionType,
};
pub use export::{contours_to_svg, grid_to_csv};
pub use field::{
    admissible_nodes, chi_field, chi_field_masked, convergence_study, fd_zzbar, liouville_fd_residual, puncture_asymptotics_check,
    residuals, residuals_at, AsymptoticsReport, BBox, ChiJet, ConvergenceStudy, FieldEvaluator, FieldGrid, GridSpec,
    Residuals, Source,
};
