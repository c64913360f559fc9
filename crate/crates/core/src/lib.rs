pub mod bnb;
pub mod cuts;
pub mod generators;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod par;
pub mod preprocess;
