#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nhcyl/averaging.hpp"
#include "nhcyl/cylinder.hpp"
#include "nhcyl/reduction.hpp"
#include "nhcyl/restricted.hpp"
#include "nhcyl/scenario.hpp"

namespace nhc {

/** Stage switches and sampling knobs; the full certificate needs every stage. */
struct PipelineOptions {
    bool solve = true;           // the per-epsilon graph construction and what follows
    bool remainder = true;       // defect-order regression over the ladder
    bool invariance = true;      // flow-map residual per epsilon
    bool norms = true;           // C0/C1 coincidence norms per epsilon
    bool hyperbolicity = true;   // Benettin exponents per epsilon
    bool containment = true;     // trapping experiment per epsilon
    bool restricted = true;      // section return map per epsilon
    bool refinement = true;      // residual under grid refinement at the finest epsilon
    bool write_outputs = true;   // graphs, certificates and summary under out_dir

    int invariance_stride = 1;
    double invariance_h = 0.1;
    int hyperbolic_orbits = 4;
    double hyperbolic_T = 6.0;
    int containment_seeds = 64;
    int refine_factor = 2;
    RestrictedMapConfig restricted_cfg;
};

/** Everything produced for one ladder entry. */
struct StageResult {
    double eps = 0.0;
    bool solved = false;
    CylinderSolution sol;
    GraphFunction hgraph;  // the same graph over the original momenta (frame "H")
    InvarianceResult invariance;
    NormEstimates norms;
    HyperbolicityResult hyperbolic;
    ContainmentResult containment;
    RestrictedSweep restricted;
    bool passed = false;
};

struct PipelineResult {
    Scenario scenario;
    std::shared_ptr<const NormalFormH1> h1;
    std::shared_ptr<const ReductionData> red;
    RemainderSweepResult remainder;
    std::vector<StageResult> stages;         // ladder order, epsilon descending
    std::vector<CertificateReport> reports;  // every certificate, emission order
    double refined_residual = 0.0;
    double refined_ratio = 0.0;
    bool passed = false;
    std::string summary_path;  // written CSV, empty when outputs are disabled
};

/**
 * The full construction and certification run. Configuration problems throw
 * ConfigError; numerical failures inside a stage are converted into failed
 * certificates and the run continues, so partial artifacts survive.
 */
PipelineResult run_pipeline(const Scenario& sc, const PipelineOptions& opt = {});

/** The per-epsilon summary table in its canonical byte layout (what sweep writes). */
std::string summary_csv(const PipelineResult& res);

}  // namespace nhc
