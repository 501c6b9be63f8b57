pub mod gridfile;
pub mod pgm;
