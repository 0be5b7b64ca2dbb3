#pragma once

#include <string>
#include <vector>

#include "bicubic.hpp"
#include "error.hpp"
#include "sensing.hpp"
#include "spl.hpp"

namespace tetropix {

struct SolverDescriptor {
    Method method;
    std::string id;
    std::string layouts; // human-readable support statement
    bool square_only;
};

inline const std::vector<SolverDescriptor>& solver_registry() {
    static const std::vector<SolverDescriptor> reg = {
        {Method::bicubic, "bicubic", "square2x2 only", true},
        {Method::spl, "spl", "any layout", false},
    };
    return reg;
}

inline const SolverDescriptor& find_solver(const std::string& id) {
    for (const auto& d : solver_registry())
        if (d.id == id)
            return d;
    throw ParameterError("unknown method '" + id + "' (expected bicubic or spl)");
}

inline const SolverDescriptor& find_solver(Method m) {
    for (const auto& d : solver_registry())
        if (d.method == m)
            return d;
    throw ParameterError("unknown method");
}

inline bool solver_supports(const SolverDescriptor& d, ShapeClass shape) {
    return !d.square_only || shape == ShapeClass::square2x2;
}

inline void check_supported(const SolverDescriptor& d, const MeasurementOperator& op) {
    if (!solver_supports(d, op.shape()))
        throw UnsupportedError("method '" + d.id + "' does not support layout '" +
                               op.layout_id() + "' (" + d.layouts + ")");
}

/// Bicubic upscaling of the low-resolution image of a square acquisition.
inline Reconstruction bicubic_reconstruct(const MeasurementOperator& op, const MeasurementVector& y) {
    check_supported(find_solver(Method::bicubic), op);
    Reconstruction rec;
    rec.method = Method::bicubic;
    rec.image = bicubic_upscale(lr_reorder(op, y));
    rec.residual = relative_residual(op, y, rec.image.field());
    return rec;
}

inline Reconstruction reconstruct(Method m, const MeasurementOperator& op, const MeasurementVector& y,
                                  const SplConfig& cfg = {}) {
    check_supported(find_solver(m), op);
    return m == Method::bicubic ? bicubic_reconstruct(op, y) : spl_reconstruct(op, y, cfg);
}

} // namespace tetropix
