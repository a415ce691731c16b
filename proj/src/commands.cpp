// placeholder: implemented module by module
namespace qcw {}
