#pragma once

#include <memory>
#include <string>

#include "scensim/value.hpp"

namespace scensim {

/// Named, typed, publish-flagged value wrapper with a stable id. The id is
/// assigned at instantiation and never changes afterwards.
class SimulationAttribute {
public:
    SimulationAttribute(std::string uuid, std::string name, DataType type, bool publish,
                        AttributeValue value)
        : uuid_(std::move(uuid)), name_(std::move(name)), type_(type), publish_(publish),
          value_(std::move(value)) {
        if (value_.kind() != type_)
            throw Error(ErrorCode::ValueTypeMismatch,
                        "attribute '" + name_ + "' initialized with " +
                            data_type_name(value_.kind()) + ", declared " + data_type_name(type_));
    }

    const std::string& uuid() const { return uuid_; }
    const std::string& name() const { return name_; }
    DataType data_type() const { return type_; }
    bool publish() const { return publish_; }
    const AttributeValue& value() const { return value_; }

    void set_value(AttributeValue v) {
        if (v.kind() != type_)
            throw Error(ErrorCode::ValueTypeMismatch,
                        "attribute '" + name_ + "' assigned " + data_type_name(v.kind()) +
                            ", declared " + data_type_name(type_));
        value_ = std::move(v);
    }

private:
    std::string uuid_;
    std::string name_;
    DataType type_;
    bool publish_;
    AttributeValue value_;
};

using SimulationAttributePtr = std::shared_ptr<SimulationAttribute>;

} // namespace scensim
