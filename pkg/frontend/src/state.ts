/**
 * Client-side session state.
 *
 * The state mirrors the server after every acknowledged action: explicit
 * decisions come from assign calls, forced values only ever come from the
 * server's `forced` responses, and recommendation badges hold exactly what
 * the recommendation endpoints returned.
 */

import type { ForcedPair, RepairOption, SessionStatus, ValueRecommendation } from './api.js';

export type FeatureState = 'unset' | 'selected' | 'deselected' | 'forced';

export interface UiSessionState {
    sessionId: string | null;
    status: SessionStatus;
    values: Record<string, 0 | 1>;
    forced: Record<string, 0 | 1>;
    badges: Record<string, ValueRecommendation>;
    nextFeature: string | null;
    repairs: RepairOption[] | null; // non-null while the repair dialog is open
    conflicts: ForcedPair[][];
    error: string | null; // network banner text
    busy: boolean;
}

export function initialState(): UiSessionState {
    return {
        sessionId: null,
        status: 'open',
        values: {},
        forced: {},
        badges: {},
        nextFeature: null,
        repairs: null,
        conflicts: [],
        error: null,
        busy: false,
    };
}

export function featureState(state: UiSessionState, featureId: string): FeatureState {
    if (featureId in state.values) {
        return state.values[featureId] === 1 ? 'selected' : 'deselected';
    }
    if (featureId in state.forced) {
        return 'forced';
    }
    return 'unset';
}

export function applyForced(state: UiSessionState, forced: ForcedPair[]): void {
    state.forced = {};
    for (const pair of forced) {
        state.forced[pair.feature] = pair.value;
    }
}

/** Badge label, derived only from what the server returned. */
export function badgeText(recommendation: ValueRecommendation): string {
    const count = recommendation.neighbors.length;
    const supporting = Math.round(recommendation.voteFraction * count);
    const verb = recommendation.value === 1 ? 'include' : 'exclude';
    return `recommended: ${verb} (${supporting}/${count} neighbors)`;
}

/** Serialized queue: at most one mutation is in flight at any time. */
export class ActionQueue {
    private tail: Promise<void> = Promise.resolve();

    run(action: () => Promise<void>): Promise<void> {
        const next = this.tail.then(action, action);
        // keep the chain alive whether or not the action failed
        this.tail = next.then(
            () => undefined,
            () => undefined,
        );
        return next;
    }
}
