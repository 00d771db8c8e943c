//! TASEP configurations, initial data and dynamics.

mod config;
mod event;
mod init;
mod passage;
mod profile;

pub use config::{required_radius, Configuration, Window};
pub use event::{evolve, evolve_coupled, evolve_coupled_with, evolve_with, CoupledPair};
pub use init::{fluctuation_counts, init_bernoulli, init_bernoulli_with, BernoulliInit, InitialSample, ZeroSite};
pub use passage::{
    count_right_of, evolve_passage, height_passage, second_class_passage, second_class_split, Boundary, Passage,
};
pub use profile::{modified_heights, HeightProfile};
