pub mod check;
pub mod design;
pub mod gen_data;
pub mod optimize;
pub mod stl;
pub mod tmm;
pub mod train;
