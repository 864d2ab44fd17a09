pub mod fd_laplace;
