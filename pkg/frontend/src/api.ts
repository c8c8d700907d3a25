/**
 * Typed client for the configuration service (`/api/v1`).
 *
 * Every method maps to exactly one endpoint; nothing is inferred client
 * side. Recommendation endpoints return null when the server declines
 * (409/422) so callers can simply not render a badge.
 */

export interface FeatureEntry {
    id: string;
    name: string;
    parent: string | null;
    rel: 'root' | 'mandatory' | 'optional' | 'grouped';
    group: { kind: 'alternative' | 'or'; index: number } | null;
    depth: number;
}

export interface ModelInfo {
    source: string;
    features: FeatureEntry[];
}

export interface ForcedPair {
    feature: string;
    value: 0 | 1;
}

export type SessionStatus = 'open' | 'completed' | 'inconsistent';

export interface AssignResult {
    status: SessionStatus;
    forced: ForcedPair[];
}

export interface SessionInfo {
    sessionId: string;
    modelId: string;
    userId: string;
    status: SessionStatus;
    values: Record<string, 0 | 1>;
    forced: ForcedPair[];
}

export interface ValueRecommendation {
    feature: string;
    value: 0 | 1;
    voteFraction: number;
    neighbors: string[];
}

export interface RepairOption {
    changes: Record<string, 0 | 1>;
    utility: number | null;
}

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(message);
        this.name = 'ApiError';
    }
}

export class NetworkError extends Error {
    constructor(message: string) {
        super(message);
        this.name = 'NetworkError';
    }
}

export class ApiClient {
    constructor(private readonly base: string = '/api/v1') {}

    async getModel(modelId: string): Promise<ModelInfo> {
        return this.request('GET', `/models/${encodeURIComponent(modelId)}`);
    }

    async createSession(modelId: string, userId: string): Promise<string> {
        const body = await this.request<{ sessionId: string }>('POST', '/sessions', { modelId, userId });
        return body.sessionId;
    }

    async getSession(sessionId: string): Promise<SessionInfo> {
        return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}`);
    }

    async assign(sessionId: string, feature: string, value: 0 | 1): Promise<AssignResult> {
        return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/assign`, { feature, value });
    }

    async complete(sessionId: string): Promise<SessionStatus> {
        const body = await this.request<{ status: SessionStatus }>(
            'POST', `/sessions/${encodeURIComponent(sessionId)}/complete`);
        return body.status;
    }

    /** Value recommendation for one unset feature, or null if the server declines. */
    async valueRecommendation(sessionId: string, feature: string, k = 2): Promise<ValueRecommendation | null> {
        return this.optional(
            `/sessions/${encodeURIComponent(sessionId)}/recommendation/value` +
            `?feature=${encodeURIComponent(feature)}&k=${k}`);
    }

    /** The suggested next feature to decide, or null if the server declines. */
    async nextFeature(sessionId: string): Promise<string | null> {
        const body = await this.optional<{ feature: string }>(
            `/sessions/${encodeURIComponent(sessionId)}/recommendation/next`);
        return body === null ? null : body.feature;
    }

    async conflicts(sessionId: string): Promise<ForcedPair[][]> {
        const body = await this.request<{ conflicts: ForcedPair[][] }>(
            'GET', `/sessions/${encodeURIComponent(sessionId)}/conflicts`);
        return body.conflicts;
    }

    async repairs(sessionId: string, profile: string): Promise<RepairOption[]> {
        const body = await this.request<{ repairs: RepairOption[] }>(
            'GET',
            `/sessions/${encodeURIComponent(sessionId)}/repairs?profile=${encodeURIComponent(profile)}`);
        return body.repairs;
    }

    private async optional<T>(path: string): Promise<T | null> {
        try {
            return await this.request<T>('GET', path);
        } catch (error) {
            if (error instanceof ApiError && (error.status === 409 || error.status === 422)) {
                return null;
            }
            throw error;
        }
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        let response: Response;
        try {
            response = await fetch(this.base + path, {
                method,
                headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
                body: body === undefined ? undefined : JSON.stringify(body),
            });
        } catch (error) {
            throw new NetworkError(`cannot reach the configuration service (${String(error)})`);
        }
        if (!response.ok) {
            let detail = response.statusText;
            try {
                const payload = (await response.json()) as { detail?: string };
                if (payload.detail) {
                    detail = payload.detail;
                }
            } catch {
                // non-JSON error body; keep the status text
            }
            throw new ApiError(response.status, detail);
        }
        return (await response.json()) as T;
    }
}
