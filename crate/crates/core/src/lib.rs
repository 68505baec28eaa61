pub mod error;
pub mod farfield_op;
pub mod forward;
pub mod geometry;
pub mod indicators;
pub mod specialfun;
pub mod workbench;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/far-field-data.md")]
    mod far_field_data {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/sampling-methods.md")]
    mod sampling_methods {}
    #[doc = include_str!("../../../book/src/direct-sampling.md")]
    mod direct_sampling {}
    #[doc = include_str!("../../../book/src/probing-methods.md")]
    mod probing_methods {}
    #[doc = include_str!("../../../book/src/enclosure.md")]
    mod enclosure {}
    #[doc = include_str!("../../../book/src/workbench.md")]
    mod workbench {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
