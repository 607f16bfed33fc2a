pub mod char2;
pub mod curve_local;
pub mod dimension_cert;
pub mod linalg_cert;
pub mod monomials;
pub mod pipeline;
pub mod steiner_cert;
pub mod synthetic;
pub mod tangency_cert;
pub mod theta_eval;
