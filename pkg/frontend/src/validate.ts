/**
 * Minimal validator for the service's shipped JSON schemas.
 *
 * Covers the subset those schemas actually use (object/array/number
 * types, required lists, nullable unions, $defs references within one
 * document). Validation failures name the offending path so malformed
 * responses surface immediately instead of rendering as NaN.
 */

type Schema = {
  type?: string | string[];
  required?: string[];
  properties?: Record<string, Schema>;
  items?: Schema;
  $ref?: string;
  enum?: unknown[];
  const?: unknown;
  $defs?: Record<string, Schema>;
};

function resolve(schema: Schema, root: Schema): Schema {
  if (schema.$ref) {
    const match = schema.$ref.match(/#\/\$defs\/(.+)$/);
    if (!match || !root.$defs || !(match[1] in root.$defs)) {
      throw new Error(`unresolvable $ref ${schema.$ref}`);
    }
    return root.$defs[match[1]];
  }
  return schema;
}

function typeMatches(value: unknown, type: string): boolean {
  switch (type) {
    case "object":
      return typeof value === "object" && value !== null && !Array.isArray(value);
    case "array":
      return Array.isArray(value);
    case "string":
      return typeof value === "string";
    case "number":
      return typeof value === "number" && Number.isFinite(value);
    case "integer":
      return typeof value === "number" && Number.isInteger(value);
    case "boolean":
      return typeof value === "boolean";
    case "null":
      return value === null;
    default:
      return true;
  }
}

export function validate(value: unknown, schema: Schema, root?: Schema, path = "$"): string[] {
  const top = root ?? schema;
  const node = resolve(schema, top);
  const errors: string[] = [];

  if (node.type !== undefined) {
    const types = Array.isArray(node.type) ? node.type : [node.type];
    if (!types.some((t) => typeMatches(value, t))) {
      errors.push(`${path}: expected ${types.join("|")}`);
      return errors;
    }
  }
  if (node.enum !== undefined && !node.enum.includes(value)) {
    errors.push(`${path}: not one of ${JSON.stringify(node.enum)}`);
  }
  if (node.const !== undefined && value !== node.const) {
    errors.push(`${path}: expected ${JSON.stringify(node.const)}`);
  }
  if (typeMatches(value, "object") && node.properties) {
    const record = value as Record<string, unknown>;
    for (const key of node.required ?? []) {
      if (!(key in record)) {
        errors.push(`${path}.${key}: missing`);
      }
    }
    for (const [key, sub] of Object.entries(node.properties)) {
      if (key in record) {
        errors.push(...validate(record[key], sub, top, `${path}.${key}`));
      }
    }
  }
  if (Array.isArray(value) && node.items) {
    value.forEach((item, index) => {
      errors.push(...validate(item, node.items as Schema, top, `${path}[${index}]`));
    });
  }
  return errors;
}

export function assertValid(value: unknown, schema: Schema, label: string): void {
  const errors = validate(value, schema);
  if (errors.length > 0) {
    throw new Error(`${label} failed schema validation: ${errors.slice(0, 5).join("; ")}`);
  }
}
