pub mod arith;
pub mod basket;
pub mod enumerate;
pub mod error;
pub mod facts;
pub mod link;
pub mod store;
pub mod wps;
