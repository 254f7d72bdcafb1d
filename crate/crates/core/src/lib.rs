pub mod corpus;
pub mod decision;
pub mod doc;
pub mod effectivity;
pub mod filtration;
pub mod game_form;
pub mod mv;
pub mod semantics;
pub mod syntax;
