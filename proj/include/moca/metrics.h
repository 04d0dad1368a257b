#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace moca {

// Positive class is "Sufficient"/"Correct".
struct ConfusionMatrix {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tn = 0;

    int64_t total() const { return tp + fp + fn + tn; }
};

struct AgreementStats {
    double          accuracy = 0.0;
    double          kappa    = 0.0;  // in [-1, 1]
    ConfusionMatrix matrix;
};

struct MetricsReport {
    std::string verifier_name;
    int         n           = 0;
    double      accuracy    = 0.0;
    double      precision   = 0.0;
    double      recall      = 0.0;
    double      f1          = 0.0;
    double      consistency = 0.0;
};

// Chance-corrected agreement. Degenerate p_e == 1 (both raters constant):
// kappa is 1 when observed agreement is perfect, else 0.
AgreementStats cohen_kappa(const ConfusionMatrix & matrix);

MetricsReport classification_metrics(const std::vector<bool> & predictions,
                                     const std::vector<bool> & labels);

}  // namespace moca
