#pragma once

#include <string>
#include <vector>

namespace ksymp {

/// Minimal JSON emitter with fixed key order and floats rendered via %.17g
/// (17 significant digits), so identical inputs produce byte-identical
/// documents. Non-finite numbers become null.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& name);
    JsonWriter& value(double x);
    JsonWriter& value(int x);
    JsonWriter& value(unsigned long long x);
    JsonWriter& value(bool x);
    JsonWriter& value(const std::string& s);
    JsonWriter& value(const char* s);
    JsonWriter& null();

    const std::string& str() const { return out_; }

private:
    void comma();
    std::string out_;
    std::vector<bool> first_; // per nesting level
    bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

} // namespace ksymp
