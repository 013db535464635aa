macro_rules! example {
    ($module:ident, $file:literal, $test:ident) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(divergence_basics, "divergence_basics.rs", divergence_basics_runs);
example!(huffman_kernels, "huffman_kernels.rs", huffman_kernels_runs);
example!(tilted_worst_case, "tilted_worst_case.rs", tilted_worst_case_runs);
example!(average_redundancy_minimax, "average_redundancy_minimax.rs", average_redundancy_minimax_runs);
example!(gg_minimax, "gg_minimax.rs", gg_minimax_runs);
example!(pointwise_nml, "pointwise_nml.rs", pointwise_nml_runs);
example!(oracle_check, "oracle_check.rs", oracle_check_runs);
example!(batch_jobs, "batch_jobs.rs", batch_jobs_runs);
