//! Closed-form example records, seeded random instances and the
//! finite-difference connection oracle.

pub mod ekt;
pub mod fd;
pub mod random;
pub mod sphere;

pub use ekt::{build_ekt_immersion, ekt_grid, EktExample};
pub use fd::fd_connection_oracle;
pub use random::{random_cms_instance, random_metallic_instance};
pub use sphere::{
    build_sphere_product, build_sphere_product_hypersurface, sphere_product_chart,
    SphereProductExample,
};
