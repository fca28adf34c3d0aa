//! Concretization of abstract traffic-scene specifications.
//!
//! A specification written in the FSS language ([`fss`]) is read into a
//! four-valued partial model ([`logic`]), checked for inconsistencies, mapped
//! to geometric constraints over a road map ([`mapping`], [`roadmap`],
//! [`geometry`]) and solved by evolutionary search ([`search`]).

pub mod fss;
pub mod geometry;
pub mod logic;
pub mod mapping;
pub mod roadmap;
pub mod par;
pub mod render;
pub mod search;
pub mod workbench;
