#pragma once

#include <functional>
#include <vector>

#include "weave/tensor.hpp"

namespace weave {

// Records the backward rule of every differentiable op in execution order.
// Nodes are appended as the forward pass runs, so the list is already
// topologically sorted; backward() replays it in reverse and then clears.
//
// One tape per training thread. Ops accept `Tape*` and skip recording when
// it is null (inference path).
class Tape {
public:
    using BackwardFn = std::function<void()>;

    void record(BackwardFn fn) { nodes_.push_back(std::move(fn)); }

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    // Seeds d(loss)/d(loss) = 1, propagates through all recorded nodes and
    // clears the tape. `loss` must be a scalar produced on this tape.
    void backward(Tensor loss) {
        if (!loss.is_scalar()) {
            throw ShapeError("backward() requires a scalar loss, got shape " +
                             shape_str(loss.shape()));
        }
        loss.grad()[0] += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
        clear();
    }

private:
    std::vector<BackwardFn> nodes_;
};

} // namespace weave
