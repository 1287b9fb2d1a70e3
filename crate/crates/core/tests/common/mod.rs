pub mod loc_oracle;
